// SPDX-License-Identifier: Apache-2.0
#include <cmath>

#include "gemm_impl.hpp"
#include "scion/linalg/kernels.hpp"

namespace scion::kernels {
namespace {

struct ScalarOps {
  static double dot(const double* x, const double* y, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
    return s;
  }
  static void axpy(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
  }
};

void axpby(double a, const double* x, double b, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = a * x[i] + b * y[i];
}

void scale(double a, double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

double sum_squares(const double* x, std::size_t n) { return ScalarOps::dot(x, x, n); }

double sum_abs(const double* x, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::fabs(x[i]);
  return s;
}

double max_abs(const double* x, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) m = std::fmax(m, std::fabs(x[i]));
  return m;
}

void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
             double* c) {
  detail::gemm_nn_blocked<ScalarOps>(m, n, k, a, b, c);
}
void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
             double* c) {
  detail::gemm_nt_blocked<ScalarOps>(m, n, k, a, b, c);
}
void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
             double* c) {
  detail::gemm_tn_blocked<ScalarOps>(m, n, k, a, b, c);
}

constexpr KernelTable kScalar{Backend::Scalar, "scalar", &ScalarOps::dot, &ScalarOps::axpy,
                              &axpby,          &scale,   &sum_squares,    &sum_abs,
                              &max_abs,        &gemm_nn, &gemm_nt,        &gemm_tn};

}  // namespace

const KernelTable& scalar_table() { return kScalar; }

}  // namespace scion::kernels
