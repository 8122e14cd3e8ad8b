#pragma once

#include "mrfmoco/types.hpp"

namespace mrfmoco {

// Separable in-plane Daubechies-4 transform (4-tap, periodic boundary),
// applied slice by slice. Axis lengths must be divisible by 2^levels.
void dwt2_forward(Volume3D &x, int levels);
void dwt2_inverse(Volume3D &x, int levels);

// Complex soft-thresholding by magnitude.
void soft_threshold(Volume3D &coeffs, double threshold);

// prox of threshold * ||W(.)||_1 : analysis, shrink, synthesis.
void wavelet_shrink(Volume3D &x, double threshold, int levels);

}  // namespace mrfmoco
