// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "scion/lmo/lmo.hpp"

namespace scion {

struct LmoSuiteSpec {
  std::vector<NormKind> kinds{NormKind::Sign,         NormKind::ColNorm, NormKind::RowNorm, NormKind::Spectral,
                              NormKind::EuclideanVec, NormKind::MaxVec,  NormKind::RmsVec};
  std::size_t samples = 100;
  std::size_t max_dim = 64;
  std::vector<double> scales{0.5, 2.0, 10.0};
  double tol_boundary = 1e-10;
  double tol_boundary_spectral = 1e-8;
  double tol_dual = 1e-8;
  double tol_scale = 1e-10;
  LmoOptions lmo;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Worst deviations over all samples of one kind:
///   boundary  | ||lmo(s)|| - rho | / rho
///   dual      | <s, lmo(s)> + rho ||s||_* | / max(1, rho ||s||_*), with the
///             closed-form dual norm
///   scale     max_a max_ij |lmo(a s) - lmo(s)| / rho
struct LmoSuiteRow {
  NormKind kind = NormKind::Sign;
  std::size_t samples = 0;
  double boundary = 0.0;
  double dual = 0.0;
  double scale = 0.0;
  bool pass = true;
};

/// Inputs are Gaussian with random shapes up to max_dim per side (vector
/// kinds use a d x 1 operand), random radius in [0.5, 2] and a random
/// magnitude in [1e-3, 1e3].
std::vector<LmoSuiteRow> run_lmo_suite(const LmoSuiteSpec& spec);

}  // namespace scion
