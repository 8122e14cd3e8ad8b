#include "mrfmoco/simulate.hpp"

#include <random>

namespace mrfmoco {

namespace {

struct PoolSeries {
  std::vector<Cd> contrast;  // per contrast, unit-normalised
  std::vector<Cd> nav;       // per within-repetition navigator slot
};

// Spoiled-GRE recursion over one repetition (after a warm-up pass), recording
// the per-contrast samples and the navigator readout values at each slot.
// Navigator readouts do not perturb Mz.
PoolSeries simulate_pool(const PulseSchedule &schedule, double t1_ms,
                         double offres_hz, double b1, double t2star_ms,
                         int navigator_every, const NavigatorGeometry &nav) {
  PoolSeries out;
  const int nc = schedule.n_contrasts();
  out.contrast.assign(nc, Cd{0, 0});
  double mz = 1.0;
  const double alpha_nav = b1 * nav.fa_deg * kPi / 180.0;
  const Cd nav_base = std::polar(std::sin(alpha_nav) *
                                     std::exp(-nav.te_ms / t2star_ms),
                                 2 * kPi * offres_hz * nav.te_ms * 1e-3);
  for (int rep = 0; rep < 2; ++rep) {
    bool record = rep == 1;
    int spoke_in_rep = 0;
    for (int c = 0; c < nc; ++c) {
      const PulseStep &st = schedule.entries[c];
      double alpha = b1 * st.fa_deg * kPi / 180.0;
      double e1 = std::exp(-st.tr_ms / t1_ms);
      double decay = t2star_ms > 0 ? std::exp(-st.te_ms / t2star_ms) : 1.0;
      Cd phase = std::polar(1.0, 2 * kPi * offres_hz * st.te_ms * 1e-3);
      Cd acc{0, 0};
      for (int s = 0; s < schedule.spokes_per_contrast; ++s) {
        acc += mz * std::sin(alpha) * decay * phase;
        mz = mz * std::cos(alpha) * e1 + (1.0 - e1);
        ++spoke_in_rep;
        if (record && navigator_every > 0 && spoke_in_rep % navigator_every == 0)
          out.nav.push_back(mz * nav_base);
      }
      if (record) out.contrast[c] = acc / double(schedule.spokes_per_contrast);
    }
    if (schedule.recovery_ms > 0) {
      double er = std::exp(-schedule.recovery_ms / t1_ms);
      mz = mz * er + (1.0 - er);
    }
  }
  return out;
}

double l2(const std::vector<Cd> &v) {
  double s = 0;
  for (const Cd &c : v) s += std::norm(c);
  return std::sqrt(s);
}

struct LabelSignal {
  std::vector<Cd> contrast;  // pd * ((1-ff) w + ff f), unit pools
  std::vector<Cd> nav;
};

std::map<int, LabelSignal> label_signals(const TissueMap &phantom,
                                         const PulseSchedule &schedule,
                                         int navigator_every,
                                         const NavigatorGeometry &nav,
                                         double fat_shift_hz, double t2w,
                                         double t2f) {
  std::map<int, LabelSignal> table;
  for (const auto &[label, tp] : phantom.params) {
    PoolSeries water = simulate_pool(schedule, tp.t1_h2o_ms, tp.b0_hz, tp.b1, t2w,
                                     navigator_every, nav);
    PoolSeries fat = simulate_pool(schedule, tp.t1_fat_ms, tp.b0_hz + fat_shift_hz,
                                   tp.b1, t2f, navigator_every, nav);
    double nw = l2(water.contrast), nf = l2(fat.contrast);
    LabelSignal sig;
    sig.contrast.resize(water.contrast.size());
    for (std::size_t c = 0; c < sig.contrast.size(); ++c) {
      Cd w = nw > 0 ? water.contrast[c] / nw : Cd{0, 0};
      Cd f = nf > 0 ? fat.contrast[c] / nf : Cd{0, 0};
      sig.contrast[c] = tp.proton_density * ((1.0 - tp.ff) * w + tp.ff * f);
    }
    sig.nav.resize(water.nav.size());
    for (std::size_t k = 0; k < sig.nav.size(); ++k) {
      Cd w = nw > 0 ? water.nav[k] / nw : Cd{0, 0};
      Cd f = nf > 0 ? fat.nav[k] / nf : Cd{0, 0};
      sig.nav[k] = tp.proton_density * ((1.0 - tp.ff) * w + tp.ff * f);
    }
    table[label] = sig;
  }
  return table;
}

}  // namespace

std::vector<std::vector<Cd>> label_contrast_table(const TissueMap &phantom,
                                                  const PulseSchedule &schedule,
                                                  double fat_shift_hz,
                                                  double t2star_water_ms,
                                                  double t2star_fat_ms) {
  NavigatorGeometry nav;
  auto table = label_signals(phantom, schedule, 0, nav, fat_shift_hz,
                             t2star_water_ms, t2star_fat_ms);
  int maxlabel = 0;
  for (const auto &[l, s] : table) maxlabel = std::max(maxlabel, l);
  std::vector<std::vector<Cd>> out(maxlabel + 1);
  for (const auto &[l, s] : table) out[l] = s.contrast;
  return out;
}

Acquisition simulate_acquisition(const TissueMap &phantom,
                                 const BreathingModel &model,
                                 const PulseSchedule &schedule,
                                 const RadialTrajectory &trajectory,
                                 const EncodingOperator &op,
                                 const AcquisitionConfig &config) {
  const Dims3 &dims = phantom.labels.dims();
  const Vec3 &spacing = phantom.labels.spacing();
  if (op.dims() != dims) throw DataError("simulate: operator dims mismatch");

  auto table =
      label_signals(phantom, schedule, trajectory.navigator_every, config.navigator,
                    config.fat_shift_hz, config.t2star_water_ms,
                    config.t2star_fat_ms);

  // contrast-series image of the reference phantom, one volume per contrast
  const int nc = schedule.n_contrasts();
  std::vector<Volume3D> contrast_imgs(nc, Volume3D(dims, spacing));
  for (int c = 0; c < nc; ++c)
    for (std::size_t i = 0; i < phantom.labels.size(); ++i)
      contrast_imgs[c][i] = table.at(phantom.labels[i]).contrast[c];

  Acquisition acq;
  acq.kspace.trajectory = trajectory;
  const int S = trajectory.samples_per_spoke;
  const int nspokes = trajectory.n_spokes();
  acq.kspace.data.assign(op.n_coils(),
                         std::vector<Cd>(static_cast<std::size_t>(nspokes) * S));

  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  // validate invertibility once at the largest excursion of the scan
  const Grid3<Vec3> unit = unit_pull_field(phantom, model);
  double d_max = 0;
  for (double tms : trajectory.timestamp_ms)
    d_max = std::max(d_max, std::abs(model.displacement_at(tms * 1e-3)));
  if (min_jacobian_determinant(scaled_field(unit, d_max)) <= 0)
    throw DataError("breathing model produces a non-invertible deformation");

  for (int sp = 0; sp < nspokes; ++sp) {
    double t_s = trajectory.timestamp_ms[sp] * 1e-3;
    DeformationField field = scaled_field(unit, model.displacement_at(t_s));
    Volume3D img = warp(field, contrast_imgs[trajectory.contrast_index[sp]]);
    auto y = op.forward(img, trajectory, {sp});
    for (int c = 0; c < op.n_coils(); ++c)
      for (int j = 0; j < S; ++j)
        acq.kspace.data[c][static_cast<std::size_t>(sp) * S + j] = y[c][j];
  }
  if (config.noise_sigma > 0) {
    for (auto &ch : acq.kspace.data)
      for (Cd &v : ch)
        v += Cd{gauss(rng) * config.noise_sigma, gauss(rng) * config.noise_sigma};
  }

  // navigator profiles: head-foot projection through an anterior slab,
  // complex sum then magnitude, on a fine readout grid
  const int nnav = static_cast<int>(trajectory.navigator_timestamp_ms.size());
  const int nsamp = config.navigator.samples;
  acq.navigators.profiles.assign(nnav, std::vector<double>(nsamp, 0.0));
  acq.navigators.timestamp_ms = trajectory.navigator_timestamp_ms;
  acq.navigators.z_spacing_mm = dims.ny * spacing.y / nsamp;
  acq.navigators.source = schedule.n_contrasts() > 1 ? NavigatorSource::MrfScan
                                                     : NavigatorSource::MotionScan;

  const double slab_cx = config.navigator.slab_center_frac * dims.nx;
  const double slab_half_vox = 0.5 * config.navigator.slab_thickness_mm / spacing.x;
  int x_lo = std::max(0, static_cast<int>(std::floor(slab_cx - slab_half_vox)));
  int x_hi = std::min(dims.nx - 1,
                      static_cast<int>(std::ceil(slab_cx + slab_half_vox)));

  const int navs_per_rep = table.begin()->second.nav.empty()
                               ? 0
                               : static_cast<int>(table.begin()->second.nav.size());

  Volume3D nav_img(dims, spacing);
  for (int n = 0; n < nnav; ++n) {
    double t_s = trajectory.navigator_timestamp_ms[n] * 1e-3;
    DeformationField field = scaled_field(unit, model.displacement_at(t_s));
    int k = navs_per_rep > 0 ? n % navs_per_rep : 0;
    for (std::size_t i = 0; i < phantom.labels.size(); ++i)
      nav_img[i] = table.at(phantom.labels[i]).nav.empty()
                       ? Cd{0, 0}
                       : table.at(phantom.labels[i]).nav[k];
    for (int j = 0; j < nsamp; ++j) {
      double yf = (j + 0.5) * dims.ny / double(nsamp) - 0.5;
      Cd acc{0, 0};
      for (int z = 0; z < dims.nz; ++z)
        for (int x = x_lo; x <= x_hi; ++x) {
          Vec3 u = sample_linear(field.u, double(x), yf, double(z));
          acc += sample_linear(nav_img, x + u.x / spacing.x, yf + u.y / spacing.y,
                               z + u.z / spacing.z);
        }
      if (config.noise_sigma > 0)
        acc += Cd{gauss(rng) * config.noise_sigma, gauss(rng) * config.noise_sigma};
      acq.navigators.profiles[n][j] = std::abs(acc);
    }
  }
  return acq;
}

}  // namespace mrfmoco
