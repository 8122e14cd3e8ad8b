#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace mrfmoco {

using Cd = std::complex<double>;

// Error taxonomy, mapped to CLI exit codes 2/3/4.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string &msg) : std::runtime_error(msg) {}
};
struct DataError : std::runtime_error {
  explicit DataError(const std::string &msg) : std::runtime_error(msg) {}
};
struct SolverError : std::runtime_error {
  explicit SolverError(const std::string &msg) : std::runtime_error(msg) {}
};

struct Vec3 {
  double x = 0, y = 0, z = 0;

  Vec3 operator+(const Vec3 &o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3 &o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  double norm() const { return std::sqrt(x * x + y * y + z * z); }
};

struct Dims3 {
  int nx = 0, ny = 0, nz = 0;

  std::size_t total() const {
    return static_cast<std::size_t>(nx) * ny * nz;
  }
  bool operator==(const Dims3 &o) const {
    return nx == o.nx && ny == o.ny && nz == o.nz;
  }
  bool operator!=(const Dims3 &o) const { return !(*this == o); }
};

// Dense voxel grid, x fastest. Spacing is physical (mm per axis).
template <typename T>
class Grid3 {
 public:
  Grid3() = default;
  Grid3(Dims3 dims, Vec3 spacing, T fill = T{})
      : dims_(dims), spacing_(spacing), data_(dims.total(), fill) {}
  explicit Grid3(Dims3 dims, T fill = T{}) : Grid3(dims, {1, 1, 1}, fill) {}

  const Dims3 &dims() const { return dims_; }
  const Vec3 &spacing() const { return spacing_; }
  void set_spacing(Vec3 s) { spacing_ = s; }
  std::size_t size() const { return data_.size(); }

  T &operator()(int x, int y, int z) {
    return data_[index(x, y, z)];
  }
  const T &operator()(int x, int y, int z) const {
    return data_[index(x, y, z)];
  }
  T &operator[](std::size_t i) { return data_[i]; }
  const T &operator[](std::size_t i) const { return data_[i]; }

  std::size_t index(int x, int y, int z) const {
    return static_cast<std::size_t>(x) +
           static_cast<std::size_t>(dims_.nx) *
               (static_cast<std::size_t>(y) +
                static_cast<std::size_t>(dims_.ny) * static_cast<std::size_t>(z));
  }
  bool contains(int x, int y, int z) const {
    return x >= 0 && x < dims_.nx && y >= 0 && y < dims_.ny && z >= 0 &&
           z < dims_.nz;
  }

  std::vector<T> &raw() { return data_; }
  const std::vector<T> &raw() const { return data_; }
  auto begin() { return data_.begin(); }
  auto end() { return data_.end(); }
  auto begin() const { return data_.begin(); }
  auto end() const { return data_.end(); }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

 private:
  Dims3 dims_{};
  Vec3 spacing_{1, 1, 1};
  std::vector<T> data_;
};

using Volume3D = Grid3<Cd>;
using RealVolume = Grid3<double>;
using LabelVolume = Grid3<int>;

// Trilinear sample at fractional voxel coordinates, zero outside the grid.
template <typename T>
T sample_linear(const Grid3<T> &g, double fx, double fy, double fz) {
  const Dims3 &d = g.dims();
  int x0 = static_cast<int>(std::floor(fx));
  int y0 = static_cast<int>(std::floor(fy));
  int z0 = static_cast<int>(std::floor(fz));
  double wx = fx - x0, wy = fy - y0, wz = fz - z0;
  T acc{};
  for (int dz = 0; dz <= 1; ++dz) {
    double cz = dz ? wz : 1.0 - wz;
    if (cz == 0.0 && d.nz > 1) continue;
    if (d.nz == 1 && dz == 1) continue;
    if (d.nz == 1) cz = 1.0;
    for (int dy = 0; dy <= 1; ++dy) {
      double cy = dy ? wy : 1.0 - wy;
      for (int dx = 0; dx <= 1; ++dx) {
        double cx = dx ? wx : 1.0 - wx;
        int xi = x0 + dx, yi = y0 + dy, zi = z0 + dz;
        if (!g.contains(xi, yi, zi)) continue;
        acc += g(xi, yi, zi) * (cx * cy * cz);
      }
    }
  }
  return acc;
}

template <typename T>
T sample_nearest(const Grid3<T> &g, double fx, double fy, double fz) {
  int x = static_cast<int>(std::lround(fx));
  int y = static_cast<int>(std::lround(fy));
  int z = static_cast<int>(std::lround(fz));
  if (!g.contains(x, y, z)) return T{};
  return g(x, y, z);
}

inline Cd vdot(const std::vector<Cd> &a, const std::vector<Cd> &b) {
  if (a.size() != b.size()) throw DataError("vdot: size mismatch");
  Cd s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

inline double vnorm(const std::vector<Cd> &a) {
  double s = 0;
  for (const Cd &v : a) s += std::norm(v);
  return std::sqrt(s);
}

inline Cd dot(const Volume3D &a, const Volume3D &b) {
  if (a.dims() != b.dims()) throw DataError("dot: dims mismatch");
  return vdot(a.raw(), b.raw());
}

inline double norm(const Volume3D &a) { return vnorm(a.raw()); }

inline double norm(const RealVolume &a) {
  double s = 0;
  for (double v : a) s += v * v;
  return std::sqrt(s);
}

inline RealVolume magnitude(const Volume3D &a) {
  RealVolume out(a.dims(), a.spacing());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = std::abs(a[i]);
  return out;
}

constexpr double kPi = 3.14159265358979323846;

}  // namespace mrfmoco
