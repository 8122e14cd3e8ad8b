#pragma once

#include <map>
#include <string>
#include <vector>

#include "mrfmoco/types.hpp"

namespace mrfmoco {

// ||a - ref|| / ||ref||
double nrmse(const RealVolume &a, const RealVolume &ref);

struct SsimConfig {
  double k1 = 0.01;
  double k2 = 0.03;
  double sigma = 1.5;     // Gaussian window
  bool slicewise = true;  // mean over slices
};

// Mean local SSIM; the dynamic range is the larger of the two image ranges so
// the index is symmetric in its arguments.
double ssim(const RealVolume &a, const RealVolume &b, const SsimConfig &config = {});

struct RoiSet {
  std::map<std::string, Grid3<std::uint8_t>> masks;
};

struct RoiStat {
  double mean = 0;
  double sd = 0;  // population
  std::size_t count = 0;
};

std::map<std::string, RoiStat> roi_stats(const RealVolume &map, const RoiSet &rois);

struct BlandAltman {
  double mean_diff = 0;
  double loa_low = 0;
  double loa_high = 0;
};

// Paired differences x - y; limits of agreement at 1.96 sample standard
// deviations.
BlandAltman bland_altman(const std::vector<double> &x, const std::vector<double> &y);

}  // namespace mrfmoco
