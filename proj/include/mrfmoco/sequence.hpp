#pragma once

#include <string>
#include <vector>

#include "mrfmoco/types.hpp"

namespace mrfmoco {

struct PulseStep {
  double fa_deg = 0;
  double te_ms = 0;
  double tr_ms = 0;
};

// One repetition of the acquisition pattern. Each contrast covers
// spokes_per_contrast consecutive spokes; recovery_ms of free relaxation is
// appended at the end of every repetition.
struct PulseSchedule {
  std::vector<PulseStep> entries;  // one per contrast
  int spokes_per_contrast = 1;
  double recovery_ms = 0;

  int n_contrasts() const { return static_cast<int>(entries.size()); }
  int spokes_per_repetition() const {
    return n_contrasts() * spokes_per_contrast;
  }
};

// Transient response of a fingerprinting pattern: 175 contrasts of 8 spokes,
// flip angle ramped 5..60..5 degrees, TE cycling through in/out-of-phase
// blocks at 3T, 1 s recovery. Stand-in pattern; a measured schedule can be
// loaded from file instead.
PulseSchedule default_mrf_schedule();

// Spoiled steady-state scan used for deformation estimation: constant
// FA 9 deg, TE/TR = 1.65/3.87 ms, 1400 spokes, no recovery gap.
PulseSchedule default_motion_schedule();

// Plain-text table, one row per contrast: FA_deg TE_ms TR_ms.
PulseSchedule load_schedule(const std::string &path, int spokes_per_contrast,
                            double recovery_ms);
void save_schedule(const PulseSchedule &schedule, const std::string &path);

// Ideally spoiled gradient-echo recursion. Returns one complex sample per
// contrast: mean over the contrast's spokes of
//   Mz * sin(B1*FA) * exp(-TE/T2*) * exp(i*2*pi*offres*TE)
// with Mz propagated as Mz <- Mz*cos(B1*FA)*E1 + (1 - E1), E1 = exp(-TR/T1).
// One warm-up repetition (with recovery) is run first so the returned series
// is the steady repetition response.
std::vector<Cd> simulate_fingerprint(const PulseSchedule &schedule, double t1_ms,
                                     double offres_hz, double b1,
                                     double t2star_ms);

struct DictGridSpec {
  std::vector<double> t1_h2o_ms;
  std::vector<double> t1_fat_ms;
  std::vector<double> b0_hz;
  std::vector<double> b1;
  double fat_shift_hz = -440.0;  // single-peak fat at 3T
  double t2star_water_ms = 30.0;
  double t2star_fat_ms = 20.0;
  int rank = 6;

  static DictGridSpec defaults();
  std::size_t n_entries() const {
    return t1_h2o_ms.size() * t1_fat_ms.size() * b0_hz.size() * b1.size();
  }
};

struct DictEntry {
  double t1_h2o_ms, t1_fat_ms, b0_hz, b1;
};

// Unit-normalised water/fat fingerprints on a parameter grid plus the
// truncated right-singular basis of the stacked fingerprint matrix.
struct CompressedDictionary {
  DictGridSpec grid;
  std::vector<std::vector<Cd>> water;  // n_entries x n_contrasts, unit L2
  std::vector<std::vector<Cd>> fat;
  std::vector<std::vector<Cd>> phi;  // n_contrasts x rank, orthonormal columns
  std::vector<double> singular_values;  // full spectrum, descending
  int rank = 0;
  int n_contrasts = 0;

  // compressed atoms, rank-length each
  std::vector<std::vector<Cd>> water_c;
  std::vector<std::vector<Cd>> fat_c;

  std::size_t n_entries() const { return water.size(); }
  DictEntry entry(std::size_t i) const;
  std::size_t entry_index(int it1w, int it1f, int ib0, int ib1) const;

  // Retained energy of the leading r singular values.
  double retained_energy(int r) const;
  int smallest_rank_for_energy(double fraction) const;
};

CompressedDictionary build_dictionary(const PulseSchedule &schedule,
                                      const DictGridSpec &spec);

// Projection onto the dictionary subspace: phi^H * fingerprint.
std::vector<Cd> compress(const std::vector<Cd> &fingerprint,
                         const std::vector<std::vector<Cd>> &phi);

}  // namespace mrfmoco
