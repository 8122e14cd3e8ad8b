#pragma once

#include <vector>

#include "mrfmoco/recon.hpp"
#include "mrfmoco/sequence.hpp"
#include "mrfmoco/types.hpp"

namespace mrfmoco {

struct ParametricMaps {
  RealVolume t1_h2o_ms;
  RealVolume ff;
  RealVolume b0_hz;
  RealVolume b1;
  RealVolume t1_fat_ms;
  RealVolume fit_residual;
};

struct VoxelMatch {
  DictEntry params{};
  double rho_water = 0;
  double rho_fat = 0;
  double ff = 0;
  double residual = 0;
  bool background = false;
};

// Bi-component match: for every grid point solve the 2-variable nonnegative
// least squares over the compressed water/fat atoms, keep the point with the
// smallest residual (lowest grid index on ties). FF is the fat share of the
// fitted amplitudes.
VoxelMatch match_voxel(const std::vector<Cd> &u, const CompressedDictionary &dict);

ParametricMaps match_maps(const SingularVolumes &volumes,
                          const CompressedDictionary &dict);

}  // namespace mrfmoco
