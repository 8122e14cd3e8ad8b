#pragma once

#include <memory>
#include <vector>

#include "mrfmoco/types.hpp"
#include "mrfmoco/warp.hpp"

namespace mrfmoco {

// In-plane golden-angle increment; spokes sample a full diameter so the
// effective angular coverage is modulo pi.
constexpr double kGoldenAngleRad = 111.2461966 * kPi / 180.0;

struct RadialTrajectory {
  std::vector<double> spoke_angles;   // radians, golden-angle increments
  std::vector<int> partition_index;   // kz index per spoke
  std::vector<double> timestamp_ms;   // acquisition time per spoke
  std::vector<int> contrast_index;    // schedule contrast per spoke
  std::vector<int> repetition_index;  // pattern repetition per spoke
  int samples_per_spoke = 64;

  // Navigator acquisitions interleaved every `navigator_every` imaging spokes.
  std::vector<double> navigator_timestamp_ms;
  std::vector<int> navigator_repetition;
  int navigator_every = 28;

  int n_spokes() const { return static_cast<int>(spoke_angles.size()); }

  // Sample position in cycles/voxel for spoke s, readout index j.
  void sample_k(int spoke, int j, double &kx, double &ky) const {
    double rho = (j - samples_per_spoke / 2) / double(samples_per_spoke);
    kx = rho * std::cos(spoke_angles[spoke]);
    ky = rho * std::sin(spoke_angles[spoke]);
  }
};

struct TrajectoryConfig {
  int spokes_per_partition = 1400;
  int samples_per_spoke = 64;
  int navigator_every = 28;
  int nz = 1;
  int repetitions = 1;
  int partition_undersampling = 1;
  double tr_ms = 5.0;        // per imaging spoke (overridden by schedule)
  double nav_tr_ms = 5.0;    // time consumed by one navigator
  double recovery_ms = 0.0;  // appended per repetition
};

// Golden-angle stack-of-stars timeline: partitions acquired sequentially,
// angles continuing across partitions, navigators every `navigator_every`
// spokes. The per-spoke TR follows the schedule when one is given.
struct PulseSchedule;
RadialTrajectory make_trajectory(const TrajectoryConfig &config);
RadialTrajectory make_trajectory(const TrajectoryConfig &config,
                                 const PulseSchedule &schedule);

struct RadialKSpace {
  // data[coil][spoke*samples + j]
  std::vector<std::vector<Cd>> data;
  RadialTrajectory trajectory;

  int n_coils() const { return static_cast<int>(data.size()); }
  int n_spokes() const { return trajectory.n_spokes(); }
  int samples() const { return trajectory.samples_per_spoke; }
};

// Smooth complex coil profiles; Gaussian magnitude lobes placed around the
// field of view with a gentle linear phase.
std::vector<Volume3D> simulate_coils(Dims3 dims, Vec3 spacing, int n_coils);

enum class EncodingMode { DirectDft, Gridded };

struct GriddingConfig {
  double oversampling = 2.0;
  int kernel_width = 4;
};

// A (and its MRF analogue): coil sensitivities, Cartesian FFT along
// partitions, in-plane radial sampling. DirectDft evaluates the exact sums
// and acts as the oracle for the Kaiser-Bessel gridded path.
class EncodingOperator {
 public:
  EncodingOperator(Dims3 dims, Vec3 spacing, std::vector<Volume3D> coils,
                   EncodingMode mode = EncodingMode::Gridded,
                   GriddingConfig gridding = {});
  ~EncodingOperator();
  EncodingOperator(EncodingOperator &&) noexcept;
  EncodingOperator &operator=(EncodingOperator &&) noexcept;
  EncodingOperator(const EncodingOperator &) = delete;
  EncodingOperator &operator=(const EncodingOperator &) = delete;

  const Dims3 &dims() const { return dims_; }
  const Vec3 &spacing() const { return spacing_; }
  int n_coils() const { return static_cast<int>(coils_.size()); }
  const std::vector<Volume3D> &coils() const { return coils_; }
  EncodingMode mode() const { return mode_; }

  // y[coil][spoke*samples + j] over the given spoke subset.
  std::vector<std::vector<Cd>> forward(const Volume3D &x,
                                       const RadialTrajectory &traj,
                                       const std::vector<int> &spokes) const;
  Volume3D adjoint(const std::vector<std::vector<Cd>> &y,
                   const RadialTrajectory &traj,
                   const std::vector<int> &spokes) const;

  // Convenience over all spokes of a k-space block.
  std::vector<std::vector<Cd>> forward(const Volume3D &x,
                                       const RadialTrajectory &traj) const;
  Volume3D adjoint(const RadialKSpace &y) const;

 private:
  struct Impl;
  Dims3 dims_{};
  Vec3 spacing_{};
  std::vector<Volume3D> coils_;
  EncodingMode mode_;
  GriddingConfig gridding_;
  std::unique_ptr<Impl> impl_;
};

// Radial ramp density compensation (Ram-Lak) for adjoint reconstructions,
// scaled so that a fully sampled adjoint approximates the unit inverse.
std::vector<double> radial_density_weights(const RadialTrajectory &traj,
                                           const std::vector<int> &spokes);

}  // namespace mrfmoco
