// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>

#include "scion/linalg/matrix.hpp"

namespace scion {

/// Seedable generator with a platform-independent output stream.
///
/// Raw bits come from std::mt19937_64, whose algorithm and output sequence
/// are fixed by the C++ standard. Uniforms use the top 53 bits; Gaussians use
/// the Box-Muller transform, consuming two uniforms per pair and returning
/// the cosine branch first. No std distribution objects are involved, since
/// their algorithms are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, 1).
  double uniform();
  double gaussian();
  /// +1 or -1 with equal probability.
  double rademacher() { return (next_u64() >> 63) != 0U ? 1.0 : -1.0; }
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// SplitMix64 finalizer; used to derive independent stream seeds.
std::uint64_t mix64(std::uint64_t x);
/// Seed for sub-stream `stream` of a run seeded with `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

Matrix rng_gaussian(std::size_t rows, std::size_t cols, std::uint64_t seed);
Matrix rng_rademacher(std::size_t rows, std::size_t cols, std::uint64_t seed);
Matrix gaussian_matrix(std::size_t rows, std::size_t cols, Rng& rng);

}  // namespace scion
