#pragma once

#include <vector>

#include "mrfmoco/types.hpp"
#include "mrfmoco/warp.hpp"

namespace mrfmoco {

struct RegistrationConfig {
  double mu = 0.05;           // weight of the field-gradient penalty
  int epoch_budget = 1500;    // total accepted iterations across levels
  int ncc_window = 9;         // odd
  int levels = 3;             // multi-resolution, x2 downsampling
  double step_voxels = 1.0;   // initial gradient-descent step
  double tol_rel = 1e-3;      // relative loss change ...
  int tol_window = 100;       // ... over this many iterations
};

struct RegistrationProblem {
  RealVolume moving;  // phase m
  RealVolume fixed;   // phase m'
  int moving_phase = 0;
  int fixed_phase = 0;
  RegistrationConfig config;
};

struct NccResult {
  double loss = 0;     // 1 - mean local NCC^2, in [0, 1]
  RealVolume grad_a;   // d loss / d a
};

// Local windowed NCC^2 similarity with analytic gradient w.r.t. the first
// image. Window sums use zero padding and a fixed window voxel count;
// eps = 1e-5 guards zero-variance windows.
NccResult ncc_loss(const RealVolume &a, const RealVolume &b, int window,
                   bool want_grad = true);

double ncc_loss_value(const RealVolume &a, const RealVolume &b, int window);

struct RegistrationTrace {
  std::vector<double> objective;  // accepted iterates, concatenated levels
  int iterations = 0;
};

// Direct minimisation of  ncc_loss(warp(u, moving), fixed) + mu*mean|grad u|^2
// over an in-plane displacement field, coarse-to-fine with backtracking
// gradient descent; accepted iterates never increase the objective.
DeformationField estimate_incremental(const RegistrationProblem &problem,
                                      RegistrationTrace *trace = nullptr);

// Fields for all ordered phase pairs: adjacent pairs estimated directly in
// both directions, longer-range pairs chained with compose(), the diagonal
// identity. Result indexed [from-1][to-1] for phases 1..M.
std::vector<std::vector<DeformationField>> estimate_all(
    const std::vector<RealVolume> &phase_volumes, const RegistrationConfig &config);

}  // namespace mrfmoco
