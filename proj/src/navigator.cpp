#include "mrfmoco/navigator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace mrfmoco {

std::vector<double> mean_profile(const NavigatorSeries &nav) {
  if (nav.n_nav() == 0) throw DataError("navigator series is empty");
  std::vector<double> mean(nav.n_z(), 0.0);
  for (const auto &p : nav.profiles)
    for (int z = 0; z < nav.n_z(); ++z) mean[z] += p[z];
  for (double &v : mean) v /= nav.n_nav();
  return mean;
}

namespace {

// Zero-mean normalised correlation of profile shifted by `shift` against the
// reference, over the valid overlap.
double zncc_at_shift(const std::vector<double> &profile,
                     const std::vector<double> &reference, int shift) {
  const int n = static_cast<int>(profile.size());
  int lo = std::max(0, -shift);
  int hi = std::min(n, n - shift);
  if (hi - lo < 8) return -2.0;
  double mp = 0, mr = 0;
  for (int z = lo; z < hi; ++z) {
    mp += profile[z + shift];
    mr += reference[z];
  }
  int cnt = hi - lo;
  mp /= cnt;
  mr /= cnt;
  double num = 0, vp = 0, vr = 0;
  for (int z = lo; z < hi; ++z) {
    double a = profile[z + shift] - mp;
    double b = reference[z] - mr;
    num += a * b;
    vp += a * a;
    vr += b * b;
  }
  if (vp <= 0 || vr <= 0) return -2.0;
  return num / std::sqrt(vp * vr);
}

}  // namespace

DisplacementTrace extract_displacement(const NavigatorSeries &nav,
                                       const std::vector<double> &reference,
                                       const ExtractionConfig &config) {
  if (nav.n_nav() < 1) throw DataError("navigator series is empty");
  if (static_cast<int>(reference.size()) != nav.n_z())
    throw DataError("reference profile length mismatch");

  const int window = std::max(1, static_cast<int>(std::lround(
                                     config.search_window_mm / nav.z_spacing_mm)));
  DisplacementTrace trace;
  trace.d_mm.resize(nav.n_nav(), 0.0);
  trace.valid.resize(nav.n_nav(), true);
  trace.timestamp_ms = nav.timestamp_ms;

  for (int i = 0; i < nav.n_nav(); ++i) {
    const auto &p = nav.profiles[i];
    double vmin = *std::min_element(p.begin(), p.end());
    double vmax = *std::max_element(p.begin(), p.end());
    if (vmax - vmin <= 1e-12 * std::max(1.0, std::abs(vmax))) {
      trace.valid[i] = false;
      continue;
    }
    int best_shift = 0;
    double best = -3.0;
    std::vector<double> scores(2 * window + 1, -3.0);
    for (int s = -window; s <= window; ++s) {
      double c = zncc_at_shift(p, reference, s);
      scores[s + window] = c;
      if (c > best) {
        best = c;
        best_shift = s;
      }
    }
    if (best < -1.5) {
      trace.valid[i] = false;
      continue;
    }
    double d = best_shift;
    if (config.subvoxel && best < 1.0 - 1e-9 && best_shift > -window &&
        best_shift < window) {
      double cm = scores[best_shift - 1 + window];
      double c0 = scores[best_shift + window];
      double cp = scores[best_shift + 1 + window];
      double denom = cm - 2 * c0 + cp;
      if (cm > -1.5 && cp > -1.5 && std::abs(denom) > 1e-12) {
        double delta = 0.5 * (cm - cp) / denom;
        if (std::abs(delta) <= 0.5) d += delta;
      }
    }
    trace.d_mm[i] = d * nav.z_spacing_mm;
  }
  return trace;
}

DeseasonalizeResult deseasonalize(const NavigatorSeries &nav, int n_rep_period) {
  if (nav.source != NavigatorSource::MrfScan)
    throw DataError("deseasonalize applies to MRF-scan navigators");
  if (n_rep_period < 1) throw DataError("deseasonalize: period must be positive");
  if (nav.n_nav() < 2 * n_rep_period)
    throw DataError("deseasonalize needs at least two repetitions of navigators");

  const int n = nav.n_nav();
  const int nz = nav.n_z();
  const int half = n_rep_period / 2;

  DeseasonalizeResult res;
  res.decomposition.trend.assign(n, std::vector<double>(nz, 0.0));
  res.decomposition.seasonal.assign(n_rep_period, std::vector<double>(nz, 1.0));
  res.decomposition.residual.assign(n, std::vector<double>(nz, 1.0));
  res.corrected = nav;

  // trend: centred moving average, window shrinking symmetrically at the edges
  for (int i = 0; i < n; ++i) {
    int h = std::min({half, i, n - 1 - i});
    for (int z = 0; z < nz; ++z) {
      double acc = 0;
      for (int k = i - h; k <= i + h; ++k) acc += nav.profiles[k][z];
      res.decomposition.trend[i][z] = acc / (2 * h + 1);
    }
  }

  // seasonal: mean of detrended signal per within-repetition index, then
  // normalised to mean one; z-lines with a vanishing trend are left alone
  std::vector<bool> line_ok(nz, true);
  for (int z = 0; z < nz; ++z)
    for (int i = 0; i < n; ++i)
      if (res.decomposition.trend[i][z] <= 1e-12) line_ok[z] = false;

  for (int z = 0; z < nz; ++z) {
    if (!line_ok[z]) continue;
    std::vector<double> acc(n_rep_period, 0.0);
    std::vector<int> cnt(n_rep_period, 0);
    for (int i = 0; i < n; ++i) {
      int k = i % n_rep_period;  // seasonal index resets at repetition jumps
      acc[k] += nav.profiles[i][z] / res.decomposition.trend[i][z];
      cnt[k]++;
    }
    double mean_s = 0;
    for (int k = 0; k < n_rep_period; ++k) {
      acc[k] = cnt[k] > 0 ? acc[k] / cnt[k] : 1.0;
      mean_s += acc[k];
    }
    mean_s /= n_rep_period;
    for (int k = 0; k < n_rep_period; ++k) {
      double s = mean_s > 0 ? acc[k] / mean_s : 1.0;
      if (s <= 1e-9) s = 1.0;
      res.decomposition.seasonal[k][z] = s;
    }
  }

  for (int i = 0; i < n; ++i) {
    int k = i % n_rep_period;
    for (int z = 0; z < nz; ++z) {
      double s = res.decomposition.seasonal[k][z];
      res.corrected.profiles[i][z] = nav.profiles[i][z] / s;
      double ts = res.decomposition.trend[i][z] * s;
      res.decomposition.residual[i][z] = ts > 1e-12 ? nav.profiles[i][z] / ts : 1.0;
    }
  }
  return res;
}

std::vector<double> interpolate_to_spokes(const DisplacementTrace &trace,
                                          const std::vector<double> &spoke_time_ms) {
  std::vector<double> tt, dd;
  for (std::size_t i = 0; i < trace.d_mm.size(); ++i)
    if (trace.valid[i]) {
      tt.push_back(trace.timestamp_ms[i]);
      dd.push_back(trace.d_mm[i]);
    }
  if (tt.empty()) throw DataError("no valid navigator displacements");
  std::vector<double> out(spoke_time_ms.size());
  for (std::size_t s = 0; s < spoke_time_ms.size(); ++s) {
    double t = spoke_time_ms[s];
    auto it = std::lower_bound(tt.begin(), tt.end(), t);
    if (it == tt.begin()) {
      out[s] = dd.front();
    } else if (it == tt.end()) {
      out[s] = dd.back();
    } else {
      std::size_t hi = it - tt.begin();
      std::size_t lo = hi - 1;
      double w = (t - tt[lo]) / (tt[hi] - tt[lo]);
      out[s] = (1 - w) * dd[lo] + w * dd[hi];
    }
  }
  return out;
}

BinningResult bin_spokes(const std::vector<double> &d_motion_spokes,
                         const std::vector<double> &d_mrf_spokes, int M) {
  if (M < 2) throw DataError("binning needs at least two phases");
  const std::size_t n = d_motion_spokes.size();
  if (n < static_cast<std::size_t>(M))
    throw DataError("binning: fewer motion-scan spokes than phases");
  {
    std::vector<double> uniq(d_motion_spokes);
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    if (uniq.size() < static_cast<std::size_t>(M))
      throw DataError("binning: fewer distinct displacements than phases");
  }

  BinningResult out;
  out.motion.M = M;
  out.mrf.M = M;
  out.motion.d_spoke_mm = d_motion_spokes;
  out.mrf.d_spoke_mm = d_mrf_spokes;

  // rank-based equal-count phases on the motion scan
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return d_motion_spokes[a] < d_motion_spokes[b];
  });
  out.motion.phase_of_spoke.assign(n, 1);
  for (std::size_t r = 0; r < n; ++r) {
    int phase = static_cast<int>((r * M) / n) + 1;
    out.motion.phase_of_spoke[order[r]] = phase;
  }

  // edges: extremes plus midpoints between adjacent phases
  out.motion.edges.resize(M + 1);
  out.motion.edges[0] = d_motion_spokes[order.front()];
  out.motion.edges[M] = d_motion_spokes[order.back()];
  for (int k = 1; k < M; ++k) {
    std::size_t hi_rank = (static_cast<std::size_t>(k) * n) / M;
    double lo = d_motion_spokes[order[hi_rank - 1]];
    double hi = d_motion_spokes[order[hi_rank]];
    out.motion.edges[k] = 0.5 * (lo + hi);
  }
  for (int k = 0; k < M; ++k)
    if (!(out.motion.edges[k + 1] > out.motion.edges[k]))
      throw DataError("binning: degenerate displacement distribution");
  out.mrf.edges = out.motion.edges;

  // the same edges sort the MRF spokes; values outside clamp to the extremes
  out.mrf.phase_of_spoke.assign(d_mrf_spokes.size(), 1);
  for (std::size_t i = 0; i < d_mrf_spokes.size(); ++i) {
    double d = d_mrf_spokes[i];
    int phase;
    if (d <= out.mrf.edges[0]) {
      phase = 1;
    } else if (d >= out.mrf.edges[M]) {
      phase = M;
    } else {
      phase = M;
      for (int k = 1; k <= M; ++k)
        if (d <= out.mrf.edges[k]) {
          phase = k;
          break;
        }
    }
    out.mrf.phase_of_spoke[i] = phase;
  }
  return out;
}

double soft_weight_value(double d, double e_lo, double e_hi, double alpha,
                         double tau) {
  if (d >= e_lo && d <= e_hi) return 1.0;
  if (d > e_hi) {
    double w = std::exp(-alpha * (d - e_hi));
    return w > tau ? w : 0.0;
  }
  double w = std::exp(-alpha * (e_lo - d));
  return w > tau ? w : 0.0;
}

SoftWeights soft_weights(const RespiratoryBins &bins, int phase, double alpha,
                         double tau) {
  if (phase < 1 || phase > bins.M) throw DataError("soft_weights: phase out of range");
  SoftWeights sw;
  sw.phase = phase;
  sw.alpha = alpha;
  sw.tau = tau;
  double e_lo = bins.edges[phase - 1];
  double e_hi = bins.edges[phase];
  sw.w.resize(bins.d_spoke_mm.size());
  for (std::size_t i = 0; i < sw.w.size(); ++i)
    sw.w[i] = soft_weight_value(bins.d_spoke_mm[i], e_lo, e_hi, alpha, tau);
  return sw;
}

void write_displacement_csv(const std::string &path,
                            const DisplacementTrace &trace,
                            const std::vector<int> &phase_of_nav) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << "index,time_ms,d_mm,phase\n";
  for (std::size_t i = 0; i < trace.d_mm.size(); ++i) {
    int phase = i < phase_of_nav.size() ? phase_of_nav[i] : 0;
    out << i << "," << trace.timestamp_ms[i] << ","
        << (trace.valid[i] ? trace.d_mm[i] : std::nan("")) << "," << phase << "\n";
  }
}

}  // namespace mrfmoco
