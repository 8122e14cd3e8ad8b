#include "mrfmoco/phantom.hpp"

#include <cmath>

namespace mrfmoco {

namespace {

double smoothstep(double t) {
  if (t <= 0) return 0;
  if (t >= 1) return 1;
  return t * t * (3 - 2 * t);
}

// Motion envelopes in fractional coordinates (x anterior, y foot-ward).
// Static below/behind the ramps so the head-end and posterior muscles do not
// move at all.
double envelope_hf(double xf, double yf) {
  double gy = smoothstep((yf - 0.19) / 0.11);
  double gx = smoothstep((xf - 0.16) / 0.18);
  return gy * gx;
}

double envelope_ap(double xf, double yf) {
  double hx = smoothstep((xf - 0.55) / 0.30);
  double gy = smoothstep((yf - 0.19) / 0.11);
  return hx * gy;
}

struct Frac {
  double x, y;
};

inline Frac frac_of(const Dims3 &d, int x, int y) {
  return {(x + 0.5) / d.nx, (y + 0.5) / d.ny};
}

inline bool in_ellipse(Frac p, double cx, double cy, double ax, double ay) {
  double dx = (p.x - cx) / ax, dy = (p.y - cy) / ay;
  return dx * dx + dy * dy < 1.0;
}

inline bool in_box(Frac p, double x0, double x1, double y0, double y1) {
  return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1;
}

// Superellipse (exponent 4) torso outline: wide at the shoulders without
// clipping the head-end muscle blocks.
inline double torso_rho(Frac p) {
  double dx = (p.x - 0.5) / 0.45, dy = (p.y - 0.55) / 0.47;
  return std::pow(dx * dx * dx * dx + dy * dy * dy * dy, 0.25);
}

constexpr double kLiverCx = 0.60, kLiverCy = 0.54, kLiverAx = 0.21, kLiverAy = 0.18;

std::map<int, TissueParams> default_params() {
  std::map<int, TissueParams> p;
  p[int(Tissue::Lung)] = {1000, 350, 0.00, 0, 1.0, 0.02};
  p[int(Tissue::Liver)] = {870, 350, 0.03, 0, 1.0, 1.00};
  p[int(Tissue::Kidney)] = {1300, 350, 0.05, 10, 0.9, 1.00};
  p[int(Tissue::MuscleShg)] = {1198, 350, 0.03, 0, 1.0, 0.90};
  p[int(Tissue::MuscleInt)] = {1198, 350, 0.08, -10, 1.0, 0.90};
  p[int(Tissue::MusclePec)] = {1198, 350, 0.04, 0, 0.9, 0.90};
  p[int(Tissue::Diaphragm)] = {1198, 350, 0.10, 0, 1.0, 0.90};
  p[int(Tissue::SubcutFat)] = {1000, 350, 0.90, -20, 1.0, 1.10};
  p[int(Tissue::Vessel)] = {1550, 350, 0.00, 0, 1.0, 1.00};
  p[int(Tissue::Body)] = {1100, 350, 0.20, 0, 1.0, 0.80};
  return p;
}

}  // namespace

const TissueParams &TissueMap::params_of(int label) const {
  auto it = params.find(label);
  if (it == params.end())
    throw DataError("tissue map: no parameters for label " + std::to_string(label));
  return it->second;
}

RealVolume TissueMap::parameter_map(const std::string &name) const {
  RealVolume out(labels.dims(), labels.spacing());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const TissueParams &tp = params_of(labels[i]);
    if (name == "t1_h2o")
      out[i] = tp.t1_h2o_ms;
    else if (name == "t1_fat")
      out[i] = tp.t1_fat_ms;
    else if (name == "ff")
      out[i] = tp.ff;
    else if (name == "b0")
      out[i] = tp.b0_hz;
    else if (name == "b1")
      out[i] = tp.b1;
    else if (name == "pd")
      out[i] = tp.proton_density;
    else
      throw DataError("unknown parameter map: " + name);
  }
  return out;
}

double BreathingModel::displacement_at(double t_s) const {
  if (period_s <= 0) throw ConfigError("breathing period must be positive");
  if (amplitude_mm < 0) throw ConfigError("breathing amplitude must be >= 0");
  double phase = kPi * t_s / period_s;
  double f;
  if (waveform == "cosine4") {
    // quartic lobe: long dwell at full expiration
    double s = std::sin(phase);
    f = s * s * s * s;
  } else if (waveform == "sinusoid") {
    f = 0.5 * (1.0 - std::cos(2.0 * phase));
  } else {
    throw ConfigError("unknown breathing waveform: " + waveform);
  }
  return amplitude_mm * f + drift_mm_per_min * (t_s / 60.0);
}

TissueMap build_phantom(const PhantomConfig &config) {
  if (config.nx < 32 || config.ny < 32)
    throw ConfigError("phantom grid must be at least 32x32 in plane");
  if (config.nz < 1) throw ConfigError("phantom needs at least one partition");

  Dims3 dims{config.nx, config.ny, config.nz};
  TissueMap map;
  map.labels = LabelVolume(dims, config.spacing_mm, int(Tissue::Lung));
  map.params = default_params();

  const double fov_y_mm = config.ny * config.spacing_mm.y;
  // Diaphragm sheet thickness: ~1.5 voxels expressed as a band of the liver
  // ellipse level set.
  const double dia_band = 1.6 * config.spacing_mm.y / (kLiverAy * fov_y_mm);

  for (int z = 0; z < dims.nz; ++z) {
    for (int y = 0; y < dims.ny; ++y) {
      for (int x = 0; x < dims.nx; ++x) {
        Frac p = frac_of(dims, x, y);
        int label = int(Tissue::Lung);
        double rho = torso_rho(p);
        if (rho < 1.0) {
          label = int(Tissue::Body);
          if (rho > 0.90) label = int(Tissue::SubcutFat);
          if (in_box(p, 0.18, 0.45, 0.07, 0.17)) label = int(Tissue::MuscleShg);
          if (in_box(p, 0.66, 0.88, 0.08, 0.17)) label = int(Tissue::MusclePec);
          if (in_box(p, 0.07, 0.13, 0.25, 0.72)) label = int(Tissue::MuscleInt);
          if (in_ellipse(p, 0.60, 0.28, 0.22, 0.20)) label = int(Tissue::Lung);
          double ldx = (p.x - kLiverCx) / kLiverAx;
          double ldy = (p.y - kLiverCy) / kLiverAy;
          double lrho = std::sqrt(ldx * ldx + ldy * ldy);
          if (lrho < 1.0) label = int(Tissue::Liver);
          if (lrho >= 1.0 && lrho < 1.0 + dia_band && ldy < -0.45)
            label = int(Tissue::Diaphragm);
          if (in_ellipse(p, 0.60, 0.60, 0.035, 0.035)) label = int(Tissue::Vessel);
          if (in_ellipse(p, 0.30, 0.68, 0.08, 0.11)) label = int(Tissue::Kidney);
        }
        map.labels(x, y, z) = label;
      }
    }
  }

  // every mandated structure must have been rasterised
  for (int t : {int(Tissue::Lung), int(Tissue::Liver), int(Tissue::Kidney),
                int(Tissue::MuscleShg), int(Tissue::MuscleInt),
                int(Tissue::MusclePec), int(Tissue::Diaphragm),
                int(Tissue::SubcutFat), int(Tissue::Vessel)}) {
    bool found = false;
    for (int v : map.labels)
      if (v == t) {
        found = true;
        break;
      }
    if (!found)
      throw ConfigError("phantom grid too small: label " + std::to_string(t) +
                        " not representable");
  }
  return map;
}

Grid3<Vec3> unit_pull_field(const TissueMap &phantom, const BreathingModel &model) {
  const Dims3 &d = phantom.labels.dims();
  const Vec3 &sp = phantom.labels.spacing();
  Grid3<Vec3> u(d, sp);
  for (int z = 0; z < d.nz; ++z)
    for (int y = 0; y < d.ny; ++y)
      for (int x = 0; x < d.nx; ++x) {
        Frac p = frac_of(d, x, y);
        // pull convention: read the reference head-ward of the current voxel,
        // so features travel foot-ward (+y) on inspiration
        u(x, y, z) = Vec3{-model.expansion_factor * envelope_ap(p.x, p.y),
                          -envelope_hf(p.x, p.y), 0.0};
      }
  return u;
}

DeformationField scaled_field(const Grid3<Vec3> &unit, double d_mm) {
  DeformationField f;
  f.u = Grid3<Vec3>(unit.dims(), unit.spacing());
  for (std::size_t i = 0; i < unit.size(); ++i) f.u[i] = unit[i] * d_mm;
  return f;
}

DeformationField truth_field_at_time(const TissueMap &phantom,
                                     const BreathingModel &model, double t_s) {
  if (t_s < 0) throw DataError("deform_at_time: t must be >= 0");
  double disp = model.displacement_at(t_s);
  DeformationField f = scaled_field(unit_pull_field(phantom, model), disp);
  double mindet = min_jacobian_determinant(f);
  if (mindet <= 0)
    throw DataError("breathing model produces a non-invertible deformation (min |J| = " +
                    std::to_string(mindet) + ")");
  return f;
}

DeformedPhantom deform_at_time(const TissueMap &phantom,
                               const BreathingModel &model, double t_s) {
  DeformedPhantom out;
  out.truth_field = truth_field_at_time(phantom, model, t_s);
  out.warped.labels = warp_nearest(out.truth_field, phantom.labels);
  out.warped.params = phantom.params;
  return out;
}

double min_jacobian_determinant(const DeformationField &field) {
  const Dims3 &d = field.u.dims();
  const Vec3 &sp = field.u.spacing();
  auto uvox = [&](int x, int y, int z) {
    const Vec3 &u = field.u(x, y, z);
    return Vec3{u.x / sp.x, u.y / sp.y, u.z / sp.z};
  };
  double best = 1e300;
  const bool flat = d.nz < 3;
  for (int z = flat ? 0 : 1; z < (flat ? d.nz : d.nz - 1); ++z)
    for (int y = 1; y < d.ny - 1; ++y)
      for (int x = 1; x < d.nx - 1; ++x) {
        Vec3 dudx = (uvox(x + 1, y, z) - uvox(x - 1, y, z)) * 0.5;
        Vec3 dudy = (uvox(x, y + 1, z) - uvox(x, y - 1, z)) * 0.5;
        Vec3 dudz = flat ? Vec3{0, 0, 0}
                         : (uvox(x, y, z + 1) - uvox(x, y, z - 1)) * 0.5;
        // rows of I + grad u
        double a00 = 1 + dudx.x, a01 = dudy.x, a02 = dudz.x;
        double a10 = dudx.y, a11 = 1 + dudy.y, a12 = dudz.y;
        double a20 = dudx.z, a21 = dudy.z, a22 = 1 + dudz.z;
        double det = a00 * (a11 * a22 - a12 * a21) - a01 * (a10 * a22 - a12 * a20) +
                     a02 * (a10 * a21 - a11 * a20);
        best = std::min(best, det);
      }
  return best;
}

}  // namespace mrfmoco
