#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mrfmoco/types.hpp"

namespace mrfmoco {

enum class NavigatorSource { MotionScan, MrfScan };

// 1D head-foot projection profiles over time (magnitude).
struct NavigatorSeries {
  std::vector<std::vector<double>> profiles;  // n_nav x n_z
  double z_spacing_mm = 1.0;
  std::vector<double> timestamp_ms;
  NavigatorSource source = NavigatorSource::MotionScan;

  int n_nav() const { return static_cast<int>(profiles.size()); }
  int n_z() const { return profiles.empty() ? 0 : static_cast<int>(profiles[0].size()); }
};

struct DisplacementTrace {
  std::vector<double> d_mm;          // per navigator
  std::vector<bool> valid;           // flat profiles are excluded
  std::vector<double> timestamp_ms;  // copied from the series
};

struct ExtractionConfig {
  double search_window_mm = 40.0;
  bool subvoxel = true;
};

std::vector<double> mean_profile(const NavigatorSeries &nav);

// Shift of each profile against the reference maximising the zero-mean
// normalised correlation over the overlap, refined by a parabolic fit of the
// peak. Positive d = features moved toward increasing z (foot-ward).
DisplacementTrace extract_displacement(const NavigatorSeries &nav,
                                       const std::vector<double> &reference,
                                       const ExtractionConfig &config = {});

// Multiplicative decomposition I = T * S * eps per z-line: T by centred
// moving average (window shrinks symmetrically at the edges), S by averaging
// the detrended signal over repetitions and renormalising to mean 1.
struct SeasonalDecomposition {
  std::vector<std::vector<double>> trend;     // n_nav x n_z
  std::vector<std::vector<double>> seasonal;  // n_rep_period x n_z
  std::vector<std::vector<double>> residual;  // n_nav x n_z
};

struct DeseasonalizeResult {
  SeasonalDecomposition decomposition;
  NavigatorSeries corrected;
};

DeseasonalizeResult deseasonalize(const NavigatorSeries &nav, int n_rep_period);

// Respiratory phases 1..M, phase 1 = full expiration (smallest d).
struct RespiratoryBins {
  int M = 5;
  std::vector<double> edges;           // e_0..e_M, strictly increasing
  std::vector<int> phase_of_spoke;     // 1..M per imaging spoke
  std::vector<double> d_spoke_mm;      // displacement interpolated to spokes
};

// Per-navigator displacements interpolated to spoke timestamps (nearest
// valid navigators, linear in time).
std::vector<double> interpolate_to_spokes(const DisplacementTrace &trace,
                                          const std::vector<double> &spoke_time_ms);

struct BinningResult {
  RespiratoryBins motion;
  RespiratoryBins mrf;
};

// Motion-scan spokes are ranked into M equal-count phases; the resulting edge
// displacements then sort the MRF spokes, clamping values outside [e_0, e_M]
// to the extreme phases.
BinningResult bin_spokes(const std::vector<double> &d_motion_spokes,
                         const std::vector<double> &d_mrf_spokes, int M);

struct SoftWeights {
  int phase = 1;
  double alpha = 0.35;  // 1/mm
  double tau = 0.5;
  std::vector<double> w;  // per spoke, in [0,1]
};

// Exponential soft gating outside the phase's displacement interval,
// truncated to zero when the weight does not exceed tau.
SoftWeights soft_weights(const RespiratoryBins &bins, int phase, double alpha,
                         double tau);

double soft_weight_value(double d, double e_lo, double e_hi, double alpha,
                         double tau);

void write_displacement_csv(const std::string &path,
                            const DisplacementTrace &trace,
                            const std::vector<int> &phase_of_nav);

}  // namespace mrfmoco
