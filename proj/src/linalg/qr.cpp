// SPDX-License-Identifier: Apache-2.0
#include "scion/linalg/qr.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "scion/linalg/kernels.hpp"
#include "scion/linalg/rng.hpp"

namespace scion {

namespace {

struct Reflector {
  std::vector<double> v;  // v[0] == 1
  double tau = 0.0;
};

// Householder factorization in place on `work` (m x n, row-major). Returns the
// reflectors; the upper triangle of `work` holds R afterwards.
std::vector<Reflector> householder(Matrix& work, std::vector<std::size_t>& perm, bool pivot,
                                   double rel_tol) {
  const std::size_t m = work.rows();
  const std::size_t n = work.cols();
  const auto& k = kernels::active();
  const std::size_t steps = std::min(m, n);
  perm.resize(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});

  std::vector<Reflector> refl;
  refl.reserve(steps);
  std::vector<double> colsq(n);
  std::vector<double> w(n);
  double first_pivot = 0.0;

  for (std::size_t j = 0; j < steps; ++j) {
    if (pivot) {
      std::fill(colsq.begin() + j, colsq.end(), 0.0);
      for (std::size_t i = j; i < m; ++i) {
        const double* row = work.data() + i * n;
        for (std::size_t c = j; c < n; ++c) colsq[c] += row[c] * row[c];
      }
      std::size_t best = j;
      for (std::size_t c = j + 1; c < n; ++c) {
        if (colsq[c] > colsq[best]) best = c;
      }
      const double best_norm = std::sqrt(colsq[best]);
      if (j == 0) first_pivot = best_norm;
      if (best_norm <= rel_tol * first_pivot) break;
      if (best != j) {
        for (std::size_t i = 0; i < m; ++i) std::swap(work(i, j), work(i, best));
        std::swap(perm[j], perm[best]);
      }
    }

    // dlarfg: H x = beta e1 with H = I - tau v v^T.
    const double alpha = work(j, j);
    double xnorm_sq = 0.0;
    for (std::size_t i = j + 1; i < m; ++i) xnorm_sq += work(i, j) * work(i, j);
    Reflector h;
    h.v.assign(m - j, 0.0);
    h.v[0] = 1.0;
    if (xnorm_sq == 0.0) {
      h.tau = 0.0;
    } else {
      const double norm = std::hypot(alpha, std::sqrt(xnorm_sq));
      const double beta = alpha >= 0.0 ? -norm : norm;
      h.tau = (beta - alpha) / beta;
      const double inv = 1.0 / (alpha - beta);
      for (std::size_t i = j + 1; i < m; ++i) h.v[i - j] = work(i, j) * inv;
      work(j, j) = beta;
    }
    for (std::size_t i = j + 1; i < m; ++i) work(i, j) = 0.0;

    if (h.tau != 0.0 && j + 1 < n) {
      const std::size_t len = n - j - 1;
      std::fill(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(len), 0.0);
      for (std::size_t i = j; i < m; ++i) {
        k.axpy(h.v[i - j], work.data() + i * n + j + 1, w.data(), len);
      }
      for (std::size_t i = j; i < m; ++i) {
        k.axpy(-h.tau * h.v[i - j], w.data(), work.data() + i * n + j + 1, len);
      }
    }
    refl.push_back(std::move(h));
  }
  return refl;
}

Matrix form_q(const std::vector<Reflector>& refl, std::size_t m) {
  const std::size_t kq = refl.size();
  Matrix q(m, kq);
  for (std::size_t i = 0; i < kq; ++i) q(i, i) = 1.0;
  const auto& k = kernels::active();
  std::vector<double> w(kq);
  for (std::size_t jr = kq; jr-- > 0;) {
    const Reflector& h = refl[jr];
    if (h.tau == 0.0) continue;
    const std::size_t len = kq - jr;
    std::fill(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(len), 0.0);
    for (std::size_t i = jr; i < m; ++i) k.axpy(h.v[i - jr], q.data() + i * kq + jr, w.data(), len);
    for (std::size_t i = jr; i < m; ++i) {
      k.axpy(-h.tau * h.v[i - jr], w.data(), q.data() + i * kq + jr, len);
    }
  }
  return q;
}

Matrix upper_rows(const Matrix& work, std::size_t rank) {
  Matrix r(rank, work.cols());
  for (std::size_t i = 0; i < rank; ++i) {
    for (std::size_t j = i; j < work.cols(); ++j) r(i, j) = work(i, j);
  }
  return r;
}

}  // namespace

QrResult qr_thin(const Matrix& a) {
  Matrix work = a;
  QrResult out;
  auto refl = householder(work, out.perm, false, 0.0);
  out.q = form_q(refl, a.rows());
  out.r = upper_rows(work, refl.size());
  return out;
}

QrResult qr_pivoted(const Matrix& a, double rel_tol) {
  if (is_zero(a)) throw std::invalid_argument("qr_pivoted: zero matrix");
  Matrix work = a;
  QrResult out;
  auto refl = householder(work, out.perm, true, rel_tol);
  out.q = form_q(refl, a.rows());
  out.r = upper_rows(work, refl.size());
  return out;
}

Matrix semi_orthogonal_init(std::size_t d_out, std::size_t d_in, std::uint64_t seed) {
  if (d_out == 0 || d_in == 0) throw std::invalid_argument("semi_orthogonal_init: zero dimension");
  const bool wide = d_out < d_in;
  Matrix g = wide ? rng_gaussian(d_in, d_out, seed) : rng_gaussian(d_out, d_in, seed);
  QrResult f = qr_thin(g);
  for (std::size_t j = 0; j < f.q.cols(); ++j) {
    if (f.r(j, j) < 0.0) {
      for (std::size_t i = 0; i < f.q.rows(); ++i) f.q(i, j) = -f.q(i, j);
    }
  }
  return wide ? f.q.transpose() : f.q;
}

}  // namespace scion
