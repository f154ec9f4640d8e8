// SPDX-License-Identifier: Apache-2.0
#include "scion/linalg/svd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "scion/linalg/kernels.hpp"
#include "scion/linalg/qr.hpp"

namespace scion {

namespace {

constexpr double kPivotTolerance = 1e-14;
constexpr double kJacobiTolerance = 1e-15;
constexpr int kMaxSweeps = 80;

// Orthogonalizes the rows of x by plane rotations applied from the left and
// mirrors every rotation onto the rows of vt.
void hestenes_rows(Matrix& x, Matrix& vt) {
  const std::size_t k = x.rows();
  const std::size_t n = x.cols();
  const auto& kern = kernels::active();
  std::vector<double> tmp(std::max(n, k));
  auto rotate = [&](double* p, double* q, std::size_t len, double c, double s) {
    // p' = c p - s q ; q' = s p + c q
    std::copy(p, p + len, tmp.begin());
    kern.axpby(-s, q, c, p, len);
    kern.axpby(s, tmp.data(), c, q, len);
  };

  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < k; ++p) {
      for (std::size_t q = p + 1; q < k; ++q) {
        double* xp = x.data() + p * n;
        double* xq = x.data() + q * n;
        const double alpha = kern.sum_squares(xp, n);
        const double beta = kern.sum_squares(xq, n);
        const double gamma = kern.dot(xp, xq, n);
        if (std::fabs(gamma) <= kJacobiTolerance * std::sqrt(alpha * beta) || gamma == 0.0) {
          continue;
        }
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::fabs(zeta) + std::hypot(1.0, zeta));
        const double c = 1.0 / std::hypot(1.0, t);
        const double s = c * t;
        rotate(xp, xq, n, c, s);
        rotate(vt.data() + p * k, vt.data() + q * k, k, c, s);
      }
    }
    if (!rotated) break;
  }
}

}  // namespace

Matrix SvdResult::reconstruct() const {
  Matrix us = u;
  for (std::size_t i = 0; i < us.rows(); ++i) {
    for (std::size_t j = 0; j < us.cols(); ++j) us(i, j) *= sigma[j];
  }
  return matmul(us, vt);
}

SvdResult svd_reduced(const Matrix& a) {
  const double scale = max_abs(a);
  if (scale == 0.0) throw std::domain_error("zero matrix has no reduced SVD");
  if (!std::isfinite(scale)) throw std::invalid_argument("svd_reduced: non-finite input");

  const Matrix scaled = a * (1.0 / scale);
  QrResult f = qr_pivoted(scaled, kPivotTolerance);
  const std::size_t k = f.r.rows();
  const std::size_t n = a.cols();

  Matrix x = std::move(f.r);
  Matrix rot = Matrix::identity(k);
  hestenes_rows(x, rot);

  std::vector<double> norms(k);
  for (std::size_t i = 0; i < k; ++i) norms[i] = std::sqrt(kernels::sum_squares(x.row(i)));
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t lhs, std::size_t rhs) { return norms[lhs] > norms[rhs]; });

  std::size_t rank = 0;
  while (rank < k && norms[order[rank]] > kRankTolerance * norms[order[0]]) ++rank;

  // x = rot * r, so r = rot^T x and a(:, perm) = (q rot^T) x.
  const Matrix u_full = matmul_nt(f.q, rot);

  SvdResult out{Matrix(a.rows(), rank), std::vector<double>(rank), Matrix(rank, n)};
  for (std::size_t c = 0; c < rank; ++c) {
    const std::size_t src = order[c];
    const double s = norms[src];
    out.sigma[c] = s * scale;
    for (std::size_t i = 0; i < a.rows(); ++i) out.u(i, c) = u_full(i, src);
    for (std::size_t j = 0; j < n; ++j) out.vt(c, f.perm[j]) = x(src, j) / s;
  }
  return out;
}

Matrix polar_factor(const SvdResult& s) { return matmul(s.u, s.vt); }

double spectral_norm(const Matrix& a) {
  if (is_zero(a)) return 0.0;
  return svd_reduced(a).sigma.front();
}

double nuclear_norm(const Matrix& a) {
  if (is_zero(a)) return 0.0;
  const auto s = svd_reduced(a);
  return std::accumulate(s.sigma.begin(), s.sigma.end(), 0.0);
}

}  // namespace scion
