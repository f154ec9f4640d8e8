// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "scion/linalg/matrix.hpp"

namespace scion {

/// Singular values below this fraction of the largest one are truncated.
inline constexpr double kRankTolerance = 1e-10;

/// a = u * diag(sigma) * vt with u (m x r), vt (r x n), sigma strictly
/// positive and nonincreasing.
struct SvdResult {
  Matrix u;
  std::vector<double> sigma;
  Matrix vt;

  std::size_t rank() const { return sigma.size(); }
  Matrix reconstruct() const;
};

/// Reduced SVD by rank-revealing Householder QR followed by one-sided
/// (Hestenes) Jacobi on the triangular factor.
/// Throws std::domain_error("zero matrix has no reduced SVD") on zero input.
SvdResult svd_reduced(const Matrix& a);

/// u * vt of the reduced SVD (the polar factor on the range of a).
Matrix polar_factor(const SvdResult& s);

double spectral_norm(const Matrix& a);
double nuclear_norm(const Matrix& a);

}  // namespace scion
