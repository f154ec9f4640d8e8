// SPDX-License-Identifier: Apache-2.0
#include "scion/linalg/newton_schulz.hpp"

#include <stdexcept>

namespace scion {

Matrix newton_schulz_orthogonalize(const Matrix& a, int iters, NewtonSchulzCoefficients coeffs) {
  if (iters < 0) throw std::invalid_argument("newton_schulz: negative iteration count");
  if (!all_finite(a)) throw std::invalid_argument("newton_schulz: non-finite input");
  const double norm = frobenius_norm(a);
  if (norm == 0.0) return Matrix::zeros_like(a);

  const bool tall = a.rows() > a.cols();
  Matrix x = tall ? a.transpose() : a;
  x *= 1.0 / norm;
  for (int it = 0; it < iters; ++it) {
    const Matrix gram = matmul_nt(x, x);
    Matrix poly = matmul(gram, gram);
    axpby(coeffs.b, gram, coeffs.c, poly);
    Matrix next = matmul(poly, x);
    axpy(coeffs.a, x, next);
    x = std::move(next);
  }
  return tall ? x.transpose() : x;
}

}  // namespace scion
