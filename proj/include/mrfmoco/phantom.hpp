#pragma once

#include <map>
#include <string>
#include <vector>

#include "mrfmoco/types.hpp"
#include "mrfmoco/warp.hpp"

namespace mrfmoco {

// Tissue labels of the synthetic torso (sagittal view: x anterior-posterior,
// y head-foot, z left-right partitions).
enum class Tissue : int {
  Lung = 0,  // background / air / lung, near-zero proton density
  Liver = 1,
  Kidney = 2,
  MuscleShg = 3,   // shoulder girdle, static
  MuscleInt = 4,   // intercostal strip, static
  MusclePec = 5,   // pectoral block, static
  Diaphragm = 6,   // thin curved sheet on the liver dome
  SubcutFat = 7,
  Vessel = 8,
  Body = 9,  // unlabelled soft-tissue filler
};

struct TissueParams {
  double t1_h2o_ms = 0;
  double t1_fat_ms = 0;
  double ff = 0;  // fat signal fraction in [0, 1]
  double b0_hz = 0;
  double b1 = 1.0;
  double proton_density = 0;
};

struct TissueMap {
  LabelVolume labels;
  std::map<int, TissueParams> params;

  const TissueParams &params_of(int label) const;

  RealVolume parameter_map(const std::string &name) const;  // "t1_h2o", "ff", ...
};

struct BreathingModel {
  double period_s = 4.0;
  double amplitude_mm = 10.0;        // head-foot excursion of the liver dome
  std::string waveform = "cosine4";  // cosine4 | sinusoid
  double expansion_factor = 0.2;     // anterior-posterior scaling of the excursion
  double drift_mm_per_min = 0.0;

  // Dome displacement d(t) in mm; positive = inspiration (liver foot-ward).
  double displacement_at(double t_s) const;
};

struct PhantomConfig {
  int nx = 64, ny = 64, nz = 1;
  Vec3 spacing_mm{4.0, 4.0, 5.0};
  std::uint64_t seed = 1234;
};

TissueMap build_phantom(const PhantomConfig &config);

// Truth field maps the reference (full-expiration) image onto the time-t
// image under the pull-warp convention used by warp(): the time-t phantom is
// warp(field, reference). Labels are resampled nearest-neighbour.
struct DeformedPhantom {
  TissueMap warped;
  DeformationField truth_field;
};

DeformedPhantom deform_at_time(const TissueMap &phantom,
                               const BreathingModel &model, double t_s);

DeformationField truth_field_at_time(const TissueMap &phantom,
                                     const BreathingModel &model, double t_s);

// Pull displacement per mm of dome excursion; truth fields are this envelope
// scaled by d(t).
Grid3<Vec3> unit_pull_field(const TissueMap &phantom, const BreathingModel &model);

DeformationField scaled_field(const Grid3<Vec3> &unit, double d_mm);

// Minimum Jacobian determinant of r -> r + u(r) over interior voxels
// (central differences); > 0 means the configured deformation is invertible.
double min_jacobian_determinant(const DeformationField &field);

}  // namespace mrfmoco
