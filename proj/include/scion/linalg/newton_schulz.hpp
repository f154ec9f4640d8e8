// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "scion/linalg/matrix.hpp"

namespace scion {

/// Quintic iteration X <- a X + b (X X^T) X + c (X X^T)^2 X.
struct NewtonSchulzCoefficients {
  double a = 3.4445;
  double b = -4.7750;
  double c = 2.0315;
};

inline constexpr int kDefaultNewtonSchulzIters = 5;

/// Approximates the polar factor U V^T of `a` without an SVD. The input is
/// normalized by its Frobenius norm first; the Gram matrix is formed on the
/// smaller side. Output singular values land in a band around 1, not at 1.
/// Zero input returns zero. With iters == 0 the normalized input is returned.
Matrix newton_schulz_orthogonalize(const Matrix& a, int iters = kDefaultNewtonSchulzIters,
                                   NewtonSchulzCoefficients coeffs = {});

}  // namespace scion
