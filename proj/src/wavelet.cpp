#include "mrfmoco/wavelet.hpp"

#include <array>

namespace mrfmoco {

namespace {

// 4-tap Daubechies analysis filters.
constexpr double kSqrt3 = 1.7320508075688772;
constexpr double kNorm = 4.0 * 1.4142135623730951;  // 4*sqrt(2)
const std::array<double, 4> kLo = {(1 + kSqrt3) / kNorm, (3 + kSqrt3) / kNorm,
                                   (3 - kSqrt3) / kNorm, (1 - kSqrt3) / kNorm};
const std::array<double, 4> kHi = {kLo[3], -kLo[2], kLo[1], -kLo[0]};

void dwt_line(std::vector<Cd> &buf, int n) {
  // periodic boundary; first half approximation, second half detail
  std::vector<Cd> tmp(n);
  int half = n / 2;
  for (int k = 0; k < half; ++k) {
    Cd lo{0, 0}, hi{0, 0};
    for (int t = 0; t < 4; ++t) {
      const Cd &v = buf[(2 * k + t) % n];
      lo += kLo[t] * v;
      hi += kHi[t] * v;
    }
    tmp[k] = lo;
    tmp[half + k] = hi;
  }
  std::copy(tmp.begin(), tmp.begin() + n, buf.begin());
}

void idwt_line(std::vector<Cd> &buf, int n) {
  std::vector<Cd> tmp(n, Cd{0, 0});
  int half = n / 2;
  for (int k = 0; k < half; ++k) {
    Cd lo = buf[k], hi = buf[half + k];
    for (int t = 0; t < 4; ++t) {
      tmp[(2 * k + t) % n] += kLo[t] * lo + kHi[t] * hi;
    }
  }
  std::copy(tmp.begin(), tmp.begin() + n, buf.begin());
}

template <bool Forward>
void transform(Volume3D &x, int levels) {
  const Dims3 &d = x.dims();
  int min_dim = std::min(d.nx, d.ny);
  int max_levels = 0;
  while (max_levels < levels && (min_dim >> (max_levels + 1)) >= 4 &&
         ((d.nx >> max_levels) % 2 == 0) && ((d.ny >> max_levels) % 2 == 0))
    ++max_levels;
  if (max_levels < levels)
    throw DataError("wavelet: image too small for requested levels");

  std::vector<Cd> buf(std::max(d.nx, d.ny));
  for (int z = 0; z < d.nz; ++z) {
    if constexpr (Forward) {
      for (int lev = 0; lev < levels; ++lev) {
        int nx = d.nx >> lev, ny = d.ny >> lev;
        for (int y = 0; y < ny; ++y) {
          for (int xx = 0; xx < nx; ++xx) buf[xx] = x(xx, y, z);
          dwt_line(buf, nx);
          for (int xx = 0; xx < nx; ++xx) x(xx, y, z) = buf[xx];
        }
        for (int xx = 0; xx < nx; ++xx) {
          for (int y = 0; y < ny; ++y) buf[y] = x(xx, y, z);
          dwt_line(buf, ny);
          for (int y = 0; y < ny; ++y) x(xx, y, z) = buf[y];
        }
      }
    } else {
      for (int lev = levels - 1; lev >= 0; --lev) {
        int nx = d.nx >> lev, ny = d.ny >> lev;
        for (int xx = 0; xx < nx; ++xx) {
          for (int y = 0; y < ny; ++y) buf[y] = x(xx, y, z);
          idwt_line(buf, ny);
          for (int y = 0; y < ny; ++y) x(xx, y, z) = buf[y];
        }
        for (int y = 0; y < ny; ++y) {
          for (int xx = 0; xx < nx; ++xx) buf[xx] = x(xx, y, z);
          idwt_line(buf, nx);
          for (int xx = 0; xx < nx; ++xx) x(xx, y, z) = buf[xx];
        }
      }
    }
  }
}

}  // namespace

void dwt2_forward(Volume3D &x, int levels) { transform<true>(x, levels); }
void dwt2_inverse(Volume3D &x, int levels) { transform<false>(x, levels); }

void soft_threshold(Volume3D &coeffs, double threshold) {
  if (threshold <= 0) return;
  for (Cd &c : coeffs) {
    double m = std::abs(c);
    c = m > threshold ? c * ((m - threshold) / m) : Cd{0, 0};
  }
}

void wavelet_shrink(Volume3D &x, double threshold, int levels) {
  dwt2_forward(x, levels);
  soft_threshold(x, threshold);
  dwt2_inverse(x, levels);
}

}  // namespace mrfmoco
