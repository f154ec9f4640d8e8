// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "scion/linalg/matrix.hpp"

namespace scion {

/// Thin Householder QR: a(:, perm) = q * r with q (m x k) having orthonormal
/// columns and r (k x n) upper trapezoidal. The diagonal of r follows the
/// LAPACK dlarfg sign convention and is not forced positive.
struct QrResult {
  Matrix q;
  Matrix r;
  std::vector<std::size_t> perm;
};

/// Unpivoted thin QR; k = min(m, n).
QrResult qr_thin(const Matrix& a);

/// Rank-revealing QR with column pivoting. Elimination stops once every
/// remaining column norm is at most rel_tol times the first pivot norm, so k
/// is the numerical rank. Requires a nonzero input.
QrResult qr_pivoted(const Matrix& a, double rel_tol);

/// Q' = Q sign(diag(R)) from the QR of a standard Gaussian d_out x d_in
/// matrix (of its transpose when d_out < d_in, transposed back). Columns are
/// orthonormal when d_in <= d_out, rows otherwise.
Matrix semi_orthogonal_init(std::size_t d_out, std::size_t d_in, std::uint64_t seed);

}  // namespace scion
