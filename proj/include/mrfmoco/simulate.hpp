#pragma once

#include <cstdint>
#include <vector>

#include "mrfmoco/encoding.hpp"
#include "mrfmoco/navigator.hpp"
#include "mrfmoco/phantom.hpp"
#include "mrfmoco/sequence.hpp"
#include "mrfmoco/types.hpp"

namespace mrfmoco {

struct NavigatorGeometry {
  int samples = 256;         // readout points along head-foot
  double slab_center_frac = 0.58;  // anterior-posterior slab centre, fraction of FOV
  double slab_thickness_mm = 30.0;
  double te_ms = 2.39;  // water/fat in phase at 3T
  double fa_deg = 8.0;
};

struct AcquisitionConfig {
  double noise_sigma = 0.0;  // complex Gaussian, absolute
  std::uint64_t seed = 1234;
  NavigatorGeometry navigator;
  // signal-model constants; must match the dictionary build
  double fat_shift_hz = -440.0;
  double t2star_water_ms = 30.0;
  double t2star_fat_ms = 20.0;
};

struct Acquisition {
  RadialKSpace kspace;
  NavigatorSeries navigators;
};

// Per-label complex contrast series: proton density times the unit-normalised
// water/fat fingerprint mixture of the label's parameters.
std::vector<std::vector<Cd>> label_contrast_table(const TissueMap &phantom,
                                                  const PulseSchedule &schedule,
                                                  double fat_shift_hz,
                                                  double t2star_water_ms,
                                                  double t2star_fat_ms);

// Every spoke is the forward projection of the reference phantom warped to the
// spoke's timestamp, with the schedule contrast of its position. Navigators
// are head-foot projections through an anterior slab at their own TE/FA,
// read on a fine grid, magnitude taken after the complex sum.
Acquisition simulate_acquisition(const TissueMap &phantom,
                                 const BreathingModel &model,
                                 const PulseSchedule &schedule,
                                 const RadialTrajectory &trajectory,
                                 const EncodingOperator &op,
                                 const AcquisitionConfig &config);

}  // namespace mrfmoco
