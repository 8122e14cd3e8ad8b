#pragma once

#include <optional>
#include <vector>

#include "mrfmoco/encoding.hpp"
#include "mrfmoco/navigator.hpp"
#include "mrfmoco/registration.hpp"
#include "mrfmoco/sequence.hpp"
#include "mrfmoco/types.hpp"
#include "mrfmoco/warp.hpp"

namespace mrfmoco {

struct SolverTrace {
  std::vector<double> objective;
};

struct MotionReconConfig {
  double lambda_tv = 0.1;
  int cg_iters = 5;
  int outer_iters = 2;
  double tv_eps = 1e-6;
};

// One term of the soft-weighted data fit: the spokes with nonzero weight for
// a respiratory phase, plus the field registering the solution onto it.
struct PhaseTerm {
  int phase = 1;
  std::vector<int> spokes;
  std::vector<double> weights;  // per spoke in `spokes`
  DeformationField field;       // m -> m', identity on the first outer pass
};

// Soft-weighted TV-regularised reconstruction of one respiratory phase by
// nonlinear conjugate gradient on
//   sum_m' || sqrt(W_m') (A M_(m->m') X - y) ||^2 + lambda * TV_eps(X).
Volume3D reconstruct_phase(const RadialKSpace &y, const EncodingOperator &op,
                           const std::vector<PhaseTerm> &terms,
                           const MotionReconConfig &config,
                           SolverTrace *trace = nullptr);

struct AlternationResult {
  std::vector<Volume3D> volumes;                      // per phase
  std::vector<std::vector<DeformationField>> fields;  // [from-1][to-1]
  std::vector<double> registered_nrmse;               // phases 2..M vs phase 1, last round
};

// Outer loop of the motion-scan reconstruction: volumes are first
// reconstructed separately per phase (identity fields, own spokes only), then
// rounds of field estimation and cross-registered reconstruction.
AlternationResult alternate(const RadialKSpace &y, const EncodingOperator &op,
                            const RespiratoryBins &bins,
                            const MotionReconConfig &recon_config,
                            const RegistrationConfig &reg_config,
                            double alpha, double tau);

struct MrfReconConfig {
  double lambda_wavelet = 1e-5;
  int fista_iters = 3;
  int power_iters = 20;
  int wavelet_levels = 3;
  int m0 = 1;  // reference phase, full expiration
};

struct SingularVolumes {
  std::vector<Volume3D> u;  // rank volumes
  int m0 = 1;
};

// Motion-corrected low-rank reconstruction: FISTA with Daubechies-4
// shrinkage on
//   sum_m' || sqrt(W~_m') (A M_(m0->m') U Phi - y~) ||^2 + lw ||W(U)||_1.
// Fields map the reference phase m0 onto each phase m'. `terms` carries the
// per-phase spoke sets and soft weights of the MRF scan.
SingularVolumes reconstruct_singular(const RadialKSpace &y,
                                     const EncodingOperator &op,
                                     const std::vector<std::vector<Cd>> &phi,
                                     const std::vector<PhaseTerm> &terms,
                                     const MrfReconConfig &config,
                                     SolverTrace *trace = nullptr);

// Baseline without binning or motion correction: ramp-filtered adjoint of the
// subspace-projected data, all spokes.
SingularVolumes reconstruct_uncorrected(const RadialKSpace &y,
                                        const EncodingOperator &op,
                                        const std::vector<std::vector<Cd>> &phi);

// Helper building PhaseTerm sets from bins + soft weights; fields default to
// identity and can be filled in afterwards.
std::vector<PhaseTerm> make_phase_terms(const RespiratoryBins &bins,
                                        double alpha, double tau, Dims3 dims,
                                        Vec3 spacing);

}  // namespace mrfmoco
