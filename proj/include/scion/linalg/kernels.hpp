// SPDX-License-Identifier: Apache-2.0
#pragma once

// Inner-loop arithmetic kernels with a scalar reference implementation and
// SIMD variants (AVX2+FMA on x86-64, NEON on AArch64). One table is selected
// at runtime from CPU features; SCION_KERNELS=scalar|avx2|neon|auto overrides
// the choice at startup.

#include <cstddef>
#include <span>
#include <string_view>

namespace scion::kernels {

enum class Backend { Scalar, Avx2, Neon };

struct KernelTable {
  Backend backend;
  const char* name;
  double (*dot)(const double* x, const double* y, std::size_t n);
  // y += a * x
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  // y = a * x + b * y
  void (*axpby)(double a, const double* x, double b, double* y, std::size_t n);
  void (*scale)(double a, double* x, std::size_t n);
  double (*sum_squares)(const double* x, std::size_t n);
  double (*sum_abs)(const double* x, std::size_t n);
  double (*max_abs)(const double* x, std::size_t n);
  // C(m x n) += A(m x k) * B(k x n), all row-major and densely packed.
  void (*gemm_nn)(std::size_t m, std::size_t n, std::size_t k, const double* a,
                  const double* b, double* c);
  // C(m x n) += A(m x k) * B(n x k)^T
  void (*gemm_nt)(std::size_t m, std::size_t n, std::size_t k, const double* a,
                  const double* b, double* c);
  // C(m x n) += A(k x m)^T * B(k x n)
  void (*gemm_tn)(std::size_t m, std::size_t n, std::size_t k, const double* a,
                  const double* b, double* c);
};

const KernelTable& scalar_table();
// Null when the backend was not compiled in.
const KernelTable* avx2_table();
const KernelTable* neon_table();

bool available(Backend b);
const KernelTable& table(Backend b);

// The table used by every Matrix operation in the process.
const KernelTable& active();
Backend active_backend();
// Throws std::invalid_argument if the backend is not available on this CPU.
void select(Backend b);

std::string_view backend_name(Backend b);
Backend parse_backend(std::string_view name);

// Span conveniences over the active table.
double dot(std::span<const double> x, std::span<const double> y);
void axpy(double a, std::span<const double> x, std::span<double> y);
double sum_squares(std::span<const double> x);
double sum_abs(std::span<const double> x);
double max_abs(std::span<const double> x);

}  // namespace scion::kernels
