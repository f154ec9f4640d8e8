// SPDX-License-Identifier: Apache-2.0
// AArch64 Advanced SIMD backend (two doubles per register).
#include <arm_neon.h>

#include <cmath>

#include "gemm_impl.hpp"
#include "scion/linalg/kernels.hpp"

namespace scion::kernels {
namespace {

struct NeonOps {
  static double dot(const double* x, const double* y, std::size_t n) {
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
      acc0 = vfmaq_f64(acc0, vld1q_f64(x + i), vld1q_f64(y + i));
      acc1 = vfmaq_f64(acc1, vld1q_f64(x + i + 2), vld1q_f64(y + i + 2));
    }
    double s = vaddvq_f64(vaddq_f64(acc0, acc1));
    for (; i < n; ++i) s = std::fma(x[i], y[i], s);
    return s;
  }

  static void axpy(double a, const double* x, double* y, std::size_t n) {
    const float64x2_t va = vdupq_n_f64(a);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
    for (; i < n; ++i) y[i] = std::fma(a, x[i], y[i]);
  }
};

void axpby(double a, const double* x, double b, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(a);
  const float64x2_t vb = vdupq_n_f64(b);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(y + i, vfmaq_f64(vmulq_f64(vb, vld1q_f64(y + i)), va, vld1q_f64(x + i)));
  }
  for (; i < n; ++i) y[i] = std::fma(a, x[i], b * y[i]);
}

void scale(double a, double* x, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(x + i, vmulq_f64(va, vld1q_f64(x + i)));
  for (; i < n; ++i) x[i] *= a;
}

double sum_squares(const double* x, std::size_t n) { return NeonOps::dot(x, x, n); }

double sum_abs(const double* x, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) acc = vaddq_f64(acc, vabsq_f64(vld1q_f64(x + i)));
  double s = vaddvq_f64(acc);
  for (; i < n; ++i) s += std::fabs(x[i]);
  return s;
}

double max_abs(const double* x, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) acc = vmaxq_f64(acc, vabsq_f64(vld1q_f64(x + i)));
  double m = vmaxvq_f64(acc);
  for (; i < n; ++i) m = std::fmax(m, std::fabs(x[i]));
  return m;
}

void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
             double* c) {
  detail::gemm_nn_blocked<NeonOps>(m, n, k, a, b, c);
}
void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
             double* c) {
  detail::gemm_nt_blocked<NeonOps>(m, n, k, a, b, c);
}
void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
             double* c) {
  detail::gemm_tn_blocked<NeonOps>(m, n, k, a, b, c);
}

constexpr KernelTable kNeon{Backend::Neon, "neon", &NeonOps::dot, &NeonOps::axpy,
                            &axpby,        &scale, &sum_squares,  &sum_abs,
                            &max_abs,      &gemm_nn, &gemm_nt,    &gemm_tn};

}  // namespace

const KernelTable* neon_table() { return &kNeon; }

}  // namespace scion::kernels
