#include "mrfmoco/sequence.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mrfmoco/threading.hpp"

namespace mrfmoco {

PulseSchedule default_mrf_schedule() {
  PulseSchedule s;
  s.spokes_per_contrast = 8;
  s.recovery_ms = 1000.0;
  const int n = 175;
  // TE cycles through in-phase / out-of-phase / in-phase values at 3T in
  // blocks of five contrasts.
  const double te_blocks[3] = {1.15, 2.39, 3.45};
  s.entries.reserve(n);
  for (int c = 0; c < n; ++c) {
    PulseStep st;
    st.fa_deg = 5.0 + 55.0 * std::sin(kPi * c / (n - 1.0));  // 5 -> 60 -> 5
    st.te_ms = te_blocks[(c / 5) % 3];
    st.tr_ms = 5.0;
    s.entries.push_back(st);
  }
  return s;
}

PulseSchedule default_motion_schedule() {
  PulseSchedule s;
  s.spokes_per_contrast = 1;
  s.recovery_ms = 0.0;
  s.entries.assign(1400, PulseStep{9.0, 1.65, 3.87});
  return s;
}

PulseSchedule load_schedule(const std::string &path, int spokes_per_contrast,
                            double recovery_ms) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open schedule file: " + path);
  PulseSchedule s;
  s.spokes_per_contrast = spokes_per_contrast;
  s.recovery_ms = recovery_ms;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    PulseStep st;
    if (!(ls >> st.fa_deg >> st.te_ms >> st.tr_ms))
      throw ConfigError("malformed schedule row: " + line);
    s.entries.push_back(st);
  }
  if (s.entries.empty()) throw ConfigError("schedule file is empty: " + path);
  return s;
}

void save_schedule(const PulseSchedule &schedule, const std::string &path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write schedule file: " + path);
  out << "# FA_deg TE_ms TR_ms\n";
  for (const PulseStep &st : schedule.entries)
    out << st.fa_deg << " " << st.te_ms << " " << st.tr_ms << "\n";
}

std::vector<Cd> simulate_fingerprint(const PulseSchedule &schedule, double t1_ms,
                                     double offres_hz, double b1,
                                     double t2star_ms) {
  if (schedule.entries.empty()) throw DataError("empty pulse schedule");
  if (t1_ms <= 0) throw DataError("T1 must be positive");
  if (b1 <= 0) throw DataError("B1 must be positive");
  for (const PulseStep &st : schedule.entries)
    if (st.tr_ms <= 0) throw DataError("TR must be positive");

  const int nc = schedule.n_contrasts();
  std::vector<Cd> out(nc, Cd{0, 0});
  double mz = 1.0;
  // warm-up repetition, then the recorded one: the tip-down chain forgets the
  // initial state almost completely within one pattern
  for (int rep = 0; rep < 2; ++rep) {
    bool record = rep == 1;
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
      }
      if (record) out[c] = acc / double(schedule.spokes_per_contrast);
    }
    if (schedule.recovery_ms > 0) {
      double er = std::exp(-schedule.recovery_ms / t1_ms);
      mz = mz * er + (1.0 - er);
    }
  }
  return out;
}

DictGridSpec DictGridSpec::defaults() {
  DictGridSpec g;
  for (double v = 700; v <= 1600; v += 50) g.t1_h2o_ms.push_back(v);
  for (double v = 250; v <= 450; v += 50) g.t1_fat_ms.push_back(v);
  for (double v = -120; v <= 120; v += 10) g.b0_hz.push_back(v);
  for (double v = 0.6; v <= 1.21; v += 0.1) g.b1.push_back(v);
  return g;
}

DictEntry CompressedDictionary::entry(std::size_t i) const {
  std::size_t nb1 = grid.b1.size(), nb0 = grid.b0_hz.size(),
              nf = grid.t1_fat_ms.size();
  std::size_t ib1 = i % nb1;
  std::size_t ib0 = (i / nb1) % nb0;
  std::size_t itf = (i / (nb1 * nb0)) % nf;
  std::size_t itw = i / (nb1 * nb0 * nf);
  return {grid.t1_h2o_ms[itw], grid.t1_fat_ms[itf], grid.b0_hz[ib0], grid.b1[ib1]};
}

std::size_t CompressedDictionary::entry_index(int it1w, int it1f, int ib0,
                                              int ib1) const {
  std::size_t nb1 = grid.b1.size(), nb0 = grid.b0_hz.size(),
              nf = grid.t1_fat_ms.size();
  return ((static_cast<std::size_t>(it1w) * nf + it1f) * nb0 + ib0) * nb1 + ib1;
}

double CompressedDictionary::retained_energy(int r) const {
  double num = 0, den = 0;
  for (std::size_t i = 0; i < singular_values.size(); ++i) {
    double e = singular_values[i] * singular_values[i];
    den += e;
    if (static_cast<int>(i) < r) num += e;
  }
  return den > 0 ? num / den : 1.0;
}

int CompressedDictionary::smallest_rank_for_energy(double fraction) const {
  for (int r = 1; r <= static_cast<int>(singular_values.size()); ++r)
    if (retained_energy(r) >= fraction) return r;
  return static_cast<int>(singular_values.size());
}

namespace {

void normalize_l2(std::vector<Cd> &v) {
  double n = vnorm(v);
  if (n > 0)
    for (Cd &c : v) c /= n;
}

}  // namespace

CompressedDictionary build_dictionary(const PulseSchedule &schedule,
                                      const DictGridSpec &spec) {
  if (spec.t1_h2o_ms.empty() || spec.t1_fat_ms.empty() || spec.b0_hz.empty() ||
      spec.b1.empty())
    throw ConfigError("dictionary grid has an empty axis");
  auto strictly_increasing = [](const std::vector<double> &v) {
    for (std::size_t i = 1; i < v.size(); ++i)
      if (v[i] <= v[i - 1]) return false;
    return true;
  };
  if (!strictly_increasing(spec.t1_h2o_ms) || !strictly_increasing(spec.t1_fat_ms) ||
      !strictly_increasing(spec.b0_hz) || !strictly_increasing(spec.b1))
    throw ConfigError("dictionary grid axes must be strictly increasing");

  CompressedDictionary dict;
  dict.grid = spec;
  dict.n_contrasts = schedule.n_contrasts();
  const std::size_t n = spec.n_entries();
  dict.water.resize(n);
  dict.fat.resize(n);

  parallel_for(n, [&](std::size_t i) {
    DictEntry e = dict.entry(i);
    dict.water[i] = simulate_fingerprint(schedule, e.t1_h2o_ms, e.b0_hz, e.b1,
                                         spec.t2star_water_ms);
    dict.fat[i] = simulate_fingerprint(schedule, e.t1_fat_ms,
                                       e.b0_hz + spec.fat_shift_hz, e.b1,
                                       spec.t2star_fat_ms);
    normalize_l2(dict.water[i]);
    normalize_l2(dict.fat[i]);
  });

  // Right singular vectors of the stacked water+fat matrix via the
  // n_contrasts x n_contrasts Gram matrix.
  const int nc = dict.n_contrasts;
  Eigen::MatrixXcd gram = Eigen::MatrixXcd::Zero(nc, nc);
  auto accumulate = [&](const std::vector<std::vector<Cd>> &rows) {
    for (const auto &f : rows) {
      Eigen::Map<const Eigen::VectorXcd> v(f.data(), nc);
      gram.noalias() += v * v.adjoint();
    }
  };
  accumulate(dict.water);
  accumulate(dict.fat);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(gram);
  if (eig.info() != Eigen::Success)
    throw SolverError("dictionary SVD failed to converge");

  // eigenvalues ascending -> reverse into descending sigma^2
  dict.singular_values.resize(nc);
  for (int i = 0; i < nc; ++i) {
    double ev = std::max(0.0, eig.eigenvalues()(nc - 1 - i));
    dict.singular_values[i] = std::sqrt(ev);
  }
  int max_rank = 0;
  for (int i = 0; i < nc; ++i)
    if (dict.singular_values[i] > 1e-12 * dict.singular_values[0]) max_rank = i + 1;
  dict.rank = std::min(spec.rank, std::max(1, max_rank));

  dict.phi.assign(nc, std::vector<Cd>(dict.rank));
  for (int r = 0; r < dict.rank; ++r) {
    Eigen::VectorXcd col = eig.eigenvectors().col(nc - 1 - r);
    // fix the overall phase for reproducibility: largest entry real positive
    int imax = 0;
    double vmax = 0;
    for (int i = 0; i < nc; ++i)
      if (std::abs(col(i)) > vmax) {
        vmax = std::abs(col(i));
        imax = i;
      }
    Cd ph = vmax > 0 ? std::conj(col(imax)) / vmax : Cd{1, 0};
    for (int i = 0; i < nc; ++i) dict.phi[i][r] = col(i) * ph;
  }

  dict.water_c.resize(n);
  dict.fat_c.resize(n);
  parallel_for(n, [&](std::size_t i) {
    dict.water_c[i] = compress(dict.water[i], dict.phi);
    dict.fat_c[i] = compress(dict.fat[i], dict.phi);
  });
  return dict;
}

std::vector<Cd> compress(const std::vector<Cd> &fingerprint,
                         const std::vector<std::vector<Cd>> &phi) {
  if (fingerprint.size() != phi.size())
    throw DataError("compress: fingerprint length does not match basis");
  if (phi.empty()) throw DataError("compress: empty basis");
  const std::size_t r = phi[0].size();
  std::vector<Cd> out(r, Cd{0, 0});
  for (std::size_t c = 0; c < phi.size(); ++c)
    for (std::size_t k = 0; k < r; ++k)
      out[k] += std::conj(phi[c][k]) * fingerprint[c];
  return out;
}

}  // namespace mrfmoco
