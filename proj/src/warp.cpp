#include "mrfmoco/warp.hpp"

namespace mrfmoco {

DeformationField DeformationField::identity(Dims3 dims, Vec3 spacing, int phase) {
  DeformationField f;
  f.u = Grid3<Vec3>(dims, spacing);
  f.source_phase = phase;
  f.target_phase = phase;
  return f;
}

namespace {

// Fractional source coordinates for output voxel (x,y,z); displacement is in
// mm, the grid in voxels.
inline void source_coords(const DeformationField &field, int x, int y, int z,
                          double &fx, double &fy, double &fz) {
  const Vec3 &u = field.u(x, y, z);
  const Vec3 &sp = field.u.spacing();
  fx = x + u.x / sp.x;
  fy = y + u.y / sp.y;
  fz = z + u.z / sp.z;
}

template <typename T>
Grid3<T> warp_linear(const DeformationField &field, const Grid3<T> &x) {
  if (field.u.dims() != x.dims()) throw DataError("warp: dims mismatch");
  Grid3<T> out(x.dims(), x.spacing());
  const Dims3 &d = x.dims();
  for (int z = 0; z < d.nz; ++z)
    for (int y = 0; y < d.ny; ++y)
      for (int xx = 0; xx < d.nx; ++xx) {
        double fx, fy, fz;
        source_coords(field, xx, y, z, fx, fy, fz);
        out(xx, y, z) = sample_linear(x, fx, fy, fz);
      }
  return out;
}

}  // namespace

Volume3D warp(const DeformationField &field, const Volume3D &x) {
  return warp_linear(field, x);
}

RealVolume warp(const DeformationField &field, const RealVolume &x) {
  return warp_linear(field, x);
}

LabelVolume warp_nearest(const DeformationField &field, const LabelVolume &x) {
  if (field.u.dims() != x.dims()) throw DataError("warp_nearest: dims mismatch");
  LabelVolume out(x.dims(), x.spacing());
  const Dims3 &d = x.dims();
  for (int z = 0; z < d.nz; ++z)
    for (int y = 0; y < d.ny; ++y)
      for (int xx = 0; xx < d.nx; ++xx) {
        double fx, fy, fz;
        source_coords(field, xx, y, z, fx, fy, fz);
        out(xx, y, z) = sample_nearest(x, fx, fy, fz);
      }
  return out;
}

Volume3D warp_adjoint(const DeformationField &field, const Volume3D &y) {
  if (field.u.dims() != y.dims()) throw DataError("warp_adjoint: dims mismatch");
  Volume3D out(y.dims(), y.spacing());
  const Dims3 &d = y.dims();
  const bool flat = d.nz == 1;
  for (int z = 0; z < d.nz; ++z)
    for (int yy = 0; yy < d.ny; ++yy)
      for (int xx = 0; xx < d.nx; ++xx) {
        double fx, fy, fz;
        source_coords(field, xx, yy, z, fx, fy, fz);
        int x0 = static_cast<int>(std::floor(fx));
        int y0 = static_cast<int>(std::floor(fy));
        int z0 = static_cast<int>(std::floor(fz));
        double wx = fx - x0, wy = fy - y0, wz = fz - z0;
        Cd v = y(xx, yy, z);
        for (int dz = 0; dz <= (flat ? 0 : 1); ++dz) {
          double cz = flat ? 1.0 : (dz ? wz : 1.0 - wz);
          for (int dy = 0; dy <= 1; ++dy) {
            double cy = dy ? wy : 1.0 - wy;
            for (int dx = 0; dx <= 1; ++dx) {
              double cx = dx ? wx : 1.0 - wx;
              int xi = x0 + dx, yi = y0 + dy, zi = z0 + dz;
              if (!out.contains(xi, yi, zi)) continue;
              out(xi, yi, zi) += v * (cx * cy * cz);
            }
          }
        }
      }
  return out;
}

DeformationField compose(const DeformationField &f, const DeformationField &g) {
  if (f.u.dims() != g.u.dims()) throw DataError("compose: dims mismatch");
  if (f.target_phase != g.source_phase)
    throw DataError("compose: phase chain mismatch (" +
                    std::to_string(f.target_phase) + " vs " +
                    std::to_string(g.source_phase) + ")");
  DeformationField out;
  out.u = Grid3<Vec3>(g.u.dims(), g.u.spacing());
  out.source_phase = f.source_phase;
  out.target_phase = g.target_phase;
  const Dims3 &d = g.u.dims();
  const Vec3 &sp = g.u.spacing();
  for (int z = 0; z < d.nz; ++z)
    for (int y = 0; y < d.ny; ++y)
      for (int x = 0; x < d.nx; ++x) {
        const Vec3 &ug = g.u(x, y, z);
        double fx = x + ug.x / sp.x;
        double fy = y + ug.y / sp.y;
        double fz = z + ug.z / sp.z;
        // f sampled at the g-displaced point, clamped to the grid edge
        fx = std::min<double>(std::max(fx, 0.0), d.nx - 1.0);
        fy = std::min<double>(std::max(fy, 0.0), d.ny - 1.0);
        fz = std::min<double>(std::max(fz, 0.0), d.nz - 1.0);
        Vec3 uf{};
        {
          int x0 = static_cast<int>(std::floor(fx));
          int y0 = static_cast<int>(std::floor(fy));
          int z0 = static_cast<int>(std::floor(fz));
          double wx = fx - x0, wy = fy - y0, wz = fz - z0;
          for (int dz = 0; dz <= (d.nz == 1 ? 0 : 1); ++dz) {
            double cz = d.nz == 1 ? 1.0 : (dz ? wz : 1.0 - wz);
            for (int dy = 0; dy <= 1; ++dy) {
              double cy = dy ? wy : 1.0 - wy;
              for (int dx = 0; dx <= 1; ++dx) {
                double cx = dx ? wx : 1.0 - wx;
                int xi = std::min(x0 + dx, d.nx - 1);
                int yi = std::min(y0 + dy, d.ny - 1);
                int zi = std::min(z0 + dz, d.nz - 1);
                const Vec3 &v = f.u(xi, yi, zi);
                double w = cx * cy * cz;
                uf.x += v.x * w;
                uf.y += v.y * w;
                uf.z += v.z * w;
              }
            }
          }
        }
        out.u(x, y, z) = ug + uf;
      }
  return out;
}

double mean_displacement_voxels(const DeformationField &field) {
  const Vec3 &sp = field.u.spacing();
  double acc = 0;
  for (const Vec3 &u : field.u) {
    Vec3 v{u.x / sp.x, u.y / sp.y, u.z / sp.z};
    acc += v.norm();
  }
  return field.u.size() ? acc / static_cast<double>(field.u.size()) : 0.0;
}

}  // namespace mrfmoco
