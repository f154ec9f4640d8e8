// SPDX-License-Identifier: Apache-2.0
#include "scion/linalg/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace scion::kernels {

#if !SCION_HAVE_AVX2
const KernelTable* avx2_table() { return nullptr; }
#endif
#if !SCION_HAVE_NEON
const KernelTable* neon_table() { return nullptr; }
#endif

namespace {

bool cpu_supports_avx2() {
#if SCION_HAVE_AVX2 && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* detect() {
  if (const char* env = std::getenv("SCION_KERNELS"); env != nullptr && *env != '\0') {
    const std::string_view name{env};
    if (name != "auto") {
      const Backend b = parse_backend(name);
      if (!available(b)) {
        throw std::invalid_argument("SCION_KERNELS=" + std::string(name) +
                                    " is not available on this CPU");
      }
      return &table(b);
    }
  }
  if (available(Backend::Avx2)) return avx2_table();
  if (available(Backend::Neon)) return neon_table();
  return &scalar_table();
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> ptr{detect()};
  return ptr;
}

}  // namespace

bool available(Backend b) {
  switch (b) {
    case Backend::Scalar:
      return true;
    case Backend::Avx2:
      return avx2_table() != nullptr && cpu_supports_avx2();
    case Backend::Neon:
      // Advanced SIMD is mandatory on AArch64.
      return neon_table() != nullptr;
  }
  return false;
}

const KernelTable& table(Backend b) {
  if (!available(b)) {
    throw std::invalid_argument("kernel backend '" + std::string(backend_name(b)) +
                                "' is not available");
  }
  switch (b) {
    case Backend::Avx2:
      return *avx2_table();
    case Backend::Neon:
      return *neon_table();
    case Backend::Scalar:
      break;
  }
  return scalar_table();
}

const KernelTable& active() { return *current().load(std::memory_order_acquire); }

Backend active_backend() { return active().backend; }

void select(Backend b) { current().store(&table(b), std::memory_order_release); }

std::string_view backend_name(Backend b) {
  switch (b) {
    case Backend::Scalar:
      return "scalar";
    case Backend::Avx2:
      return "avx2";
    case Backend::Neon:
      return "neon";
  }
  return "unknown";
}

Backend parse_backend(std::string_view name) {
  if (name == "scalar") return Backend::Scalar;
  if (name == "avx2") return Backend::Avx2;
  if (name == "neon") return Backend::Neon;
  throw std::invalid_argument("unknown kernel backend '" + std::string(name) + "'");
}

double dot(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("dot: length mismatch");
  return active().dot(x.data(), y.data(), x.size());
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("axpy: length mismatch");
  active().axpy(a, x.data(), y.data(), x.size());
}

double sum_squares(std::span<const double> x) { return active().sum_squares(x.data(), x.size()); }
double sum_abs(std::span<const double> x) { return active().sum_abs(x.data(), x.size()); }
double max_abs(std::span<const double> x) { return active().max_abs(x.data(), x.size()); }

}  // namespace scion::kernels
