#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mrfmoco/types.hpp"

namespace mrfmoco {

// Minimal 8-bit grayscale PNG writer (zlib-compressed).
void write_png_gray(const std::string &path, const std::vector<std::uint8_t> &pixels,
                    int width, int height);

// One slice windowed to [lo, hi] and rasterised; nearest-neighbour upscale.
void write_map_png(const std::string &path, const RealVolume &map, int slice,
                   double lo, double hi, int upscale = 4);

// Simple polyline/scatter plot on a white canvas.
struct PlotSeries {
  std::vector<double> x;
  std::vector<double> y;
  bool line = true;
  std::uint8_t shade = 0;  // 0 = black
};

void write_plot_png(const std::string &path, const std::vector<PlotSeries> &series,
                    int width = 640, int height = 360);

}  // namespace mrfmoco
