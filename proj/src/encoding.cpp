#include "mrfmoco/encoding.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>

#include "mrfmoco/sequence.hpp"

namespace mrfmoco {

RadialTrajectory make_trajectory(const TrajectoryConfig &config) {
  PulseSchedule flat;
  flat.spokes_per_contrast = config.spokes_per_partition;
  flat.recovery_ms = config.recovery_ms;
  flat.entries.assign(1, PulseStep{0, 0, config.tr_ms});
  return make_trajectory(config, flat);
}

RadialTrajectory make_trajectory(const TrajectoryConfig &config,
                                 const PulseSchedule &schedule) {
  if (config.spokes_per_partition <= 0 || config.samples_per_spoke <= 0)
    throw ConfigError("trajectory: spoke counts must be positive");
  if (schedule.spokes_per_repetition() != config.spokes_per_partition)
    throw ConfigError("trajectory: schedule covers " +
                      std::to_string(schedule.spokes_per_repetition()) +
                      " spokes but the partition has " +
                      std::to_string(config.spokes_per_partition));

  RadialTrajectory t;
  t.samples_per_spoke = config.samples_per_spoke;
  t.navigator_every = config.navigator_every;

  double clock_ms = 0;
  long angle_index = 0;
  int rep = 0;
  for (int r = 0; r < config.repetitions; ++r) {
    for (int p = 0; p < config.nz; p += config.partition_undersampling) {
      for (int s = 0; s < config.spokes_per_partition; ++s) {
        int contrast = s / schedule.spokes_per_contrast;
        const PulseStep &st = schedule.entries[contrast];
        t.spoke_angles.push_back(std::fmod(angle_index * kGoldenAngleRad, 2 * kPi));
        t.partition_index.push_back(p);
        t.timestamp_ms.push_back(clock_ms);
        t.contrast_index.push_back(contrast);
        t.repetition_index.push_back(rep);
        ++angle_index;
        clock_ms += st.tr_ms;
        if (config.navigator_every > 0 && (s + 1) % config.navigator_every == 0) {
          t.navigator_timestamp_ms.push_back(clock_ms);
          t.navigator_repetition.push_back(rep);
          clock_ms += config.nav_tr_ms;
        }
      }
      clock_ms += schedule.recovery_ms;
      ++rep;
    }
  }
  return t;
}

std::vector<Volume3D> simulate_coils(Dims3 dims, Vec3 spacing, int n_coils) {
  std::vector<Volume3D> coils;
  coils.reserve(n_coils);
  const double cx = dims.nx / 2.0, cy = dims.ny / 2.0;
  const double sigma = 0.55 * std::max(dims.nx, dims.ny);
  for (int c = 0; c < n_coils; ++c) {
    double ang = 2 * kPi * c / std::max(1, n_coils);
    double px = cx + 0.7 * dims.nx * std::cos(ang) / 2.0;
    double py = cy + 0.7 * dims.ny * std::sin(ang) / 2.0;
    Volume3D s(dims, spacing);
    for (int z = 0; z < dims.nz; ++z)
      for (int y = 0; y < dims.ny; ++y)
        for (int x = 0; x < dims.nx; ++x) {
          double r2 = (x - px) * (x - px) + (y - py) * (y - py);
          double mag = 0.25 + std::exp(-r2 / (2 * sigma * sigma));
          double ph = 0.15 * ((x - cx) * std::cos(ang) + (y - cy) * std::sin(ang)) /
                      std::max(dims.nx, dims.ny);
          s(x, y, z) = std::polar(mag, 2 * kPi * ph);
        }
    coils.push_back(std::move(s));
  }
  return coils;
}

namespace {

std::mutex &fftw_mutex() {
  static std::mutex m;
  return m;
}

double kb_beta(double os, int width) {
  double a = width / os * (os - 0.5);
  return kPi * std::sqrt(a * a - 0.8);
}

double kb_kernel(double u, double beta, int width) {
  double t = 2.0 * u / width;
  double arg = 1.0 - t * t;
  if (arg < 0) return 0.0;
  return std::cyl_bessel_i(0.0, beta * std::sqrt(arg)) / std::cyl_bessel_i(0.0, beta);
}

// Fourier transform of the KB kernel; sinh branch inside the main lobe, sinc
// outside.
double kb_apodization(double f, double beta, int width) {
  double a = kPi * width * f;
  double s = beta * beta - a * a;
  double v;
  if (s > 0) {
    double r = std::sqrt(s);
    v = std::sinh(r) / r;
  } else {
    double r = std::sqrt(-s);
    v = r < 1e-12 ? 1.0 : std::sin(r) / r;
  }
  return v / (std::sinh(beta) / beta);
}

}  // namespace

struct EncodingOperator::Impl {
  int ox = 0, oy = 0;
  fftw_plan plan_fwd = nullptr;
  fftw_plan plan_bwd = nullptr;
  std::vector<double> apod_x, apod_y;  // per image voxel
  double beta = 0;
  int width = 4;
  // kernel lookup over [0, width/2], shared by forward and adjoint so the
  // pair stays an exact transpose
  std::vector<double> kb_lut;
  double lut_scale = 0;

  double kernel(double u) const {
    double a = std::abs(u) * lut_scale;
    std::size_t i = static_cast<std::size_t>(a);
    if (i + 1 >= kb_lut.size()) return 0.0;
    double w = a - i;
    return (1 - w) * kb_lut[i] + w * kb_lut[i + 1];
  }

  ~Impl() {
    std::lock_guard<std::mutex> lock(fftw_mutex());
    if (plan_fwd) fftw_destroy_plan(plan_fwd);
    if (plan_bwd) fftw_destroy_plan(plan_bwd);
  }
};

EncodingOperator::EncodingOperator(Dims3 dims, Vec3 spacing,
                                   std::vector<Volume3D> coils, EncodingMode mode,
                                   GriddingConfig gridding)
    : dims_(dims), spacing_(spacing), coils_(std::move(coils)), mode_(mode),
      gridding_(gridding) {
  if (coils_.empty()) throw ConfigError("encoding operator needs at least one coil");
  for (const Volume3D &c : coils_)
    if (c.dims() != dims_) throw DataError("coil sensitivity dims mismatch");

  impl_ = std::make_unique<Impl>();
  impl_->ox = static_cast<int>(std::lround(gridding_.oversampling * dims_.nx));
  impl_->oy = static_cast<int>(std::lround(gridding_.oversampling * dims_.ny));
  impl_->width = gridding_.kernel_width;
  impl_->beta = kb_beta(gridding_.oversampling, gridding_.kernel_width);

  const int lut_n = 4096;
  impl_->kb_lut.resize(lut_n + 2);
  impl_->lut_scale = lut_n / (impl_->width / 2.0);
  for (int i = 0; i < lut_n + 2; ++i) {
    double u = i / impl_->lut_scale;
    impl_->kb_lut[i] = kb_kernel(u, impl_->beta, impl_->width);
  }

  impl_->apod_x.resize(dims_.nx);
  impl_->apod_y.resize(dims_.ny);
  for (int x = 0; x < dims_.nx; ++x)
    impl_->apod_x[x] =
        kb_apodization((x - dims_.nx / 2) / double(impl_->ox), impl_->beta,
                       impl_->width);
  for (int y = 0; y < dims_.ny; ++y)
    impl_->apod_y[y] =
        kb_apodization((y - dims_.ny / 2) / double(impl_->oy), impl_->beta,
                       impl_->width);

  std::lock_guard<std::mutex> lock(fftw_mutex());
  std::vector<Cd> buf(static_cast<std::size_t>(impl_->ox) * impl_->oy);
  auto *p = reinterpret_cast<fftw_complex *>(buf.data());
  impl_->plan_fwd = fftw_plan_dft_2d(impl_->oy, impl_->ox, p, p, FFTW_FORWARD,
                                     FFTW_ESTIMATE);
  impl_->plan_bwd = fftw_plan_dft_2d(impl_->oy, impl_->ox, p, p, FFTW_BACKWARD,
                                     FFTW_ESTIMATE);
}

EncodingOperator::~EncodingOperator() = default;
EncodingOperator::EncodingOperator(EncodingOperator &&) noexcept = default;
EncodingOperator &EncodingOperator::operator=(EncodingOperator &&) noexcept = default;

namespace {

// z-DFT of the coil-weighted volume at one partition frequency.
void z_project(const Volume3D &w, int partition, int nz, std::vector<Cd> &slice) {
  const Dims3 &d = w.dims();
  const double kz = nz > 0 ? (partition - nz / 2) / double(nz) : 0.0;
  const double cz = d.nz / 2.0;
  slice.assign(static_cast<std::size_t>(d.nx) * d.ny, Cd{0, 0});
  for (int z = 0; z < d.nz; ++z) {
    Cd ph = std::polar(1.0, -2 * kPi * kz * (z - cz));
    const Cd *src = &w.raw()[w.index(0, 0, z)];
    for (std::size_t i = 0; i < slice.size(); ++i) slice[i] += src[i] * ph;
  }
}

void z_expand(const std::vector<Cd> &slice, int partition, int nz, Volume3D &out) {
  const Dims3 &d = out.dims();
  const double kz = nz > 0 ? (partition - nz / 2) / double(nz) : 0.0;
  const double cz = d.nz / 2.0;
  for (int z = 0; z < d.nz; ++z) {
    Cd ph = std::polar(1.0, 2 * kPi * kz * (z - cz));
    Cd *dst = &out.raw()[out.index(0, 0, z)];
    for (std::size_t i = 0; i < slice.size(); ++i) dst[i] += slice[i] * ph;
  }
}

}  // namespace

std::vector<std::vector<Cd>> EncodingOperator::forward(
    const Volume3D &x, const RadialTrajectory &traj,
    const std::vector<int> &spokes) const {
  if (x.dims() != dims_) throw DataError("forward: volume dims mismatch");
  const int S = traj.samples_per_spoke;
  const int nc = n_coils();
  std::vector<std::vector<Cd>> y(nc, std::vector<Cd>(spokes.size() * S, Cd{0, 0}));

  // spokes grouped by partition share the in-plane transform
  std::map<int, std::vector<std::size_t>> by_partition;
  for (std::size_t i = 0; i < spokes.size(); ++i)
    by_partition[traj.partition_index[spokes[i]]].push_back(i);

  const double cx = dims_.nx / 2.0, cy = dims_.ny / 2.0;

  for (int c = 0; c < nc; ++c) {
    Volume3D w(dims_, spacing_);
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = coils_[c][i] * x[i];

    for (const auto &[partition, idx] : by_partition) {
      std::vector<Cd> slice;
      z_project(w, partition, dims_.nz, slice);

      if (mode_ == EncodingMode::DirectDft) {
        for (std::size_t i : idx) {
          int sp = spokes[i];
          double ca = std::cos(traj.spoke_angles[sp]);
          double sa = std::sin(traj.spoke_angles[sp]);
          for (int j = 0; j < S; ++j) {
            double rho = (j - S / 2) / double(S);
            Cd acc{0, 0};
            for (int yy = 0; yy < dims_.ny; ++yy)
              for (int xx = 0; xx < dims_.nx; ++xx) {
                double phase = -2 * kPi * rho *
                               (ca * (xx - cx) + sa * (yy - cy));
                acc += slice[yy * dims_.nx + xx] * std::polar(1.0, phase);
              }
            y[c][i * S + j] = acc;
          }
        }
      } else {
        const int ox = impl_->ox, oy = impl_->oy, W = impl_->width;
        std::vector<Cd> grid(static_cast<std::size_t>(ox) * oy, Cd{0, 0});
        // de-apodised image placed so the centre voxel maps to index 0
        for (int yy = 0; yy < dims_.ny; ++yy) {
          int gy = ((yy - dims_.ny / 2) % oy + oy) % oy;
          for (int xx = 0; xx < dims_.nx; ++xx) {
            int gx = ((xx - dims_.nx / 2) % ox + ox) % ox;
            grid[static_cast<std::size_t>(gy) * ox + gx] =
                slice[yy * dims_.nx + xx] /
                (impl_->apod_x[xx] * impl_->apod_y[yy]);
          }
        }
        fftw_execute_dft(impl_->plan_fwd,
                         reinterpret_cast<fftw_complex *>(grid.data()),
                         reinterpret_cast<fftw_complex *>(grid.data()));
        for (std::size_t i : idx) {
          int sp = spokes[i];
          double ca = std::cos(traj.spoke_angles[sp]);
          double sa = std::sin(traj.spoke_angles[sp]);
          for (int j = 0; j < S; ++j) {
            double rho = (j - S / 2) / double(S);
            double fx = rho * ca * ox;
            double fy = rho * sa * oy;
            int bx = static_cast<int>(std::floor(fx)) - W / 2 + 1;
            int by = static_cast<int>(std::floor(fy)) - W / 2 + 1;
            Cd acc{0, 0};
            for (int qy = by; qy < by + W; ++qy) {
              double wy = kb_kernel(fy - qy, impl_->beta, W);
              if (wy == 0) continue;
              int gy = (qy % oy + oy) % oy;
              for (int qx = bx; qx < bx + W; ++qx) {
                double wx = kb_kernel(fx - qx, impl_->beta, W);
                if (wx == 0) continue;
                int gx = (qx % ox + ox) % ox;
                acc += grid[static_cast<std::size_t>(gy) * ox + gx] * (wx * wy);
              }
            }
            y[c][i * S + j] = acc;
          }
        }
      }
    }
  }
  return y;
}

Volume3D EncodingOperator::adjoint(const std::vector<std::vector<Cd>> &y,
                                   const RadialTrajectory &traj,
                                   const std::vector<int> &spokes) const {
  const int S = traj.samples_per_spoke;
  const int nc = n_coils();
  if (static_cast<int>(y.size()) != nc) throw DataError("adjoint: coil count mismatch");
  for (const auto &ch : y)
    if (ch.size() != spokes.size() * static_cast<std::size_t>(S))
      throw DataError("adjoint: sample count mismatch");

  std::map<int, std::vector<std::size_t>> by_partition;
  for (std::size_t i = 0; i < spokes.size(); ++i)
    by_partition[traj.partition_index[spokes[i]]].push_back(i);

  const double cx = dims_.nx / 2.0, cy = dims_.ny / 2.0;
  Volume3D out(dims_, spacing_);

  for (int c = 0; c < nc; ++c) {
    Volume3D acc_vol(dims_, spacing_);
    for (const auto &[partition, idx] : by_partition) {
      std::vector<Cd> slice(static_cast<std::size_t>(dims_.nx) * dims_.ny,
                            Cd{0, 0});
      if (mode_ == EncodingMode::DirectDft) {
        for (std::size_t i : idx) {
          int sp = spokes[i];
          double ca = std::cos(traj.spoke_angles[sp]);
          double sa = std::sin(traj.spoke_angles[sp]);
          for (int j = 0; j < S; ++j) {
            double rho = (j - S / 2) / double(S);
            Cd v = y[c][i * S + j];
            for (int yy = 0; yy < dims_.ny; ++yy)
              for (int xx = 0; xx < dims_.nx; ++xx) {
                double phase =
                    2 * kPi * rho * (ca * (xx - cx) + sa * (yy - cy));
                slice[yy * dims_.nx + xx] += v * std::polar(1.0, phase);
              }
          }
        }
      } else {
        const int ox = impl_->ox, oy = impl_->oy, W = impl_->width;
        std::vector<Cd> grid(static_cast<std::size_t>(ox) * oy, Cd{0, 0});
        for (std::size_t i : idx) {
          int sp = spokes[i];
          double ca = std::cos(traj.spoke_angles[sp]);
          double sa = std::sin(traj.spoke_angles[sp]);
          for (int j = 0; j < S; ++j) {
            double rho = (j - S / 2) / double(S);
            double fx = rho * ca * ox;
            double fy = rho * sa * oy;
            int bx = static_cast<int>(std::floor(fx)) - W / 2 + 1;
            int by = static_cast<int>(std::floor(fy)) - W / 2 + 1;
            Cd v = y[c][i * S + j];
            for (int qy = by; qy < by + W; ++qy) {
              double wy = kb_kernel(fy - qy, impl_->beta, W);
              if (wy == 0) continue;
              int gy = (qy % oy + oy) % oy;
              for (int qx = bx; qx < bx + W; ++qx) {
                double wx = kb_kernel(fx - qx, impl_->beta, W);
                if (wx == 0) continue;
                int gx = (qx % ox + ox) % ox;
                grid[static_cast<std::size_t>(gy) * ox + gx] += v * (wx * wy);
              }
            }
          }
        }
        fftw_execute_dft(impl_->plan_bwd,
                         reinterpret_cast<fftw_complex *>(grid.data()),
                         reinterpret_cast<fftw_complex *>(grid.data()));
        for (int yy = 0; yy < dims_.ny; ++yy) {
          int gy = ((yy - dims_.ny / 2) % oy + oy) % oy;
          for (int xx = 0; xx < dims_.nx; ++xx) {
            int gx = ((xx - dims_.nx / 2) % ox + ox) % ox;
            slice[yy * dims_.nx + xx] =
                grid[static_cast<std::size_t>(gy) * ox + gx] /
                (impl_->apod_x[xx] * impl_->apod_y[yy]);
          }
        }
      }
      z_expand(slice, partition, dims_.nz, acc_vol);
    }
    for (std::size_t i = 0; i < out.size(); ++i)
      out[i] += std::conj(coils_[c][i]) * acc_vol[i];
  }
  return out;
}

std::vector<std::vector<Cd>> EncodingOperator::forward(
    const Volume3D &x, const RadialTrajectory &traj) const {
  std::vector<int> all(traj.n_spokes());
  for (int i = 0; i < traj.n_spokes(); ++i) all[i] = i;
  return forward(x, traj, all);
}

Volume3D EncodingOperator::adjoint(const RadialKSpace &y) const {
  std::vector<int> all(y.n_spokes());
  for (int i = 0; i < y.n_spokes(); ++i) all[i] = i;
  return adjoint(y.data, y.trajectory, all);
}

std::vector<double> radial_density_weights(const RadialTrajectory &traj,
                                           const std::vector<int> &spokes) {
  const int S = traj.samples_per_spoke;
  // density per (partition, contrast) group: each contrast samples its own
  // image, so the ramp is normalised by that group's spoke count
  std::map<std::pair<int, int>, int> group_count;
  for (int sp : spokes)
    group_count[{traj.partition_index[sp], traj.contrast_index[sp]}]++;

  int nz = 1;
  for (int sp : spokes) nz = std::max(nz, traj.partition_index[sp] + 1);

  std::vector<double> w(spokes.size() * S, 0.0);
  for (std::size_t i = 0; i < spokes.size(); ++i) {
    int sp = spokes[i];
    int n = group_count[{traj.partition_index[sp], traj.contrast_index[sp]}];
    for (int j = 0; j < S; ++j) {
      double rho = (j - S / 2) / double(S);
      double wj = rho == 0.0 ? kPi / (4.0 * S * S * n)
                             : kPi * std::abs(rho) / (n * S);
      w[i * S + j] = wj / nz;
    }
  }
  return w;
}

}  // namespace mrfmoco
