#pragma once

#include "mrfmoco/types.hpp"

namespace mrfmoco {

// Per-voxel displacement in mm. warp() is a pull: out(r) = in(r + u(r)/spacing)
// with trilinear interpolation and zero padding outside the grid, so the field
// for registering phase m onto phase m' lives on the m' grid and reads into
// the phase-m image.
struct DeformationField {
  Grid3<Vec3> u;
  int source_phase = 0;
  int target_phase = 0;

  static DeformationField identity(Dims3 dims, Vec3 spacing, int phase = 0);
  bool is_identity_shape(const Dims3 &d) const { return u.dims() == d; }
};

Volume3D warp(const DeformationField &field, const Volume3D &x);
RealVolume warp(const DeformationField &field, const RealVolume &x);
LabelVolume warp_nearest(const DeformationField &field, const LabelVolume &x);

// Exact transpose of the interpolation matrix of warp(): pushes each sample
// back onto its source voxels.
Volume3D warp_adjoint(const DeformationField &field, const Volume3D &y);

// Field equivalent to warping with f, then with g is given by
// compose(f, g)(r) = g(r) + f(r + g(r)): for fields f: m->m' and g: m'->m''
// it returns m->m'' such that warp(result, x) == warp(g, warp(f, x)).
DeformationField compose(const DeformationField &f, const DeformationField &g);

double mean_displacement_voxels(const DeformationField &field);

}  // namespace mrfmoco
