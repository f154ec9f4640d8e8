// SPDX-License-Identifier: Apache-2.0
#pragma once

// Blocked GEMM loops shared by every kernel backend. Each backend includes
// this header from its own translation unit and instantiates the loops with
// its own vector primitives. Blocking never changes the accumulation order
// of an output element, so results match the unblocked loop bit for bit.

#include <algorithm>
#include <cstddef>

namespace scion::kernels::detail {
namespace {

constexpr std::size_t kColBlock = 256;
constexpr std::size_t kDepthBlock = 128;
constexpr std::size_t kRowBlock = 64;

template <class Ops>
void gemm_nn_blocked(std::size_t m, std::size_t n, std::size_t k, const double* a,
                     const double* b, double* c) {
  for (std::size_t jj = 0; jj < n; jj += kColBlock) {
    const std::size_t nb = std::min(kColBlock, n - jj);
    for (std::size_t pp = 0; pp < k; pp += kDepthBlock) {
      const std::size_t pe = std::min(k, pp + kDepthBlock);
      for (std::size_t i = 0; i < m; ++i) {
        double* crow = c + i * n + jj;
        const double* arow = a + i * k;
        for (std::size_t p = pp; p < pe; ++p) {
          const double s = arow[p];
          if (s != 0.0) Ops::axpy(s, b + p * n + jj, crow, nb);
        }
      }
    }
  }
}

template <class Ops>
void gemm_nt_blocked(std::size_t m, std::size_t n, std::size_t k, const double* a,
                     const double* b, double* c) {
  for (std::size_t ii = 0; ii < m; ii += kRowBlock) {
    const std::size_t ie = std::min(m, ii + kRowBlock);
    for (std::size_t jj = 0; jj < n; jj += kRowBlock) {
      const std::size_t je = std::min(n, jj + kRowBlock);
      for (std::size_t i = ii; i < ie; ++i) {
        for (std::size_t j = jj; j < je; ++j) {
          c[i * n + j] += Ops::dot(a + i * k, b + j * k, k);
        }
      }
    }
  }
}

template <class Ops>
void gemm_tn_blocked(std::size_t m, std::size_t n, std::size_t k, const double* a,
                     const double* b, double* c) {
  for (std::size_t jj = 0; jj < n; jj += kColBlock) {
    const std::size_t nb = std::min(kColBlock, n - jj);
    for (std::size_t p = 0; p < k; ++p) {
      const double* arow = a + p * m;
      const double* brow = b + p * n + jj;
      for (std::size_t i = 0; i < m; ++i) {
        const double s = arow[i];
        if (s != 0.0) Ops::axpy(s, brow, c + i * n + jj, nb);
      }
    }
  }
}

}  // namespace
}  // namespace scion::kernels::detail
