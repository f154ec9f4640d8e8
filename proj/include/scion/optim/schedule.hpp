// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string_view>

namespace scion {

enum class GammaKind { Constant, LinearDecay, ConstantThenLinear };
enum class AlphaKind { Constant, Vanishing };

/// Step sizes gamma_k and averaging weights alpha_k for k = 1..horizon.
struct ScheduleSpec {
  GammaKind gamma_kind = GammaKind::Constant;
  double gamma0 = 0.1;
  /// Length of the final linear ramp for ConstantThenLinear.
  std::size_t warmdown = 0;
  AlphaKind alpha_kind = AlphaKind::Constant;
  double alpha0 = 0.1;
  std::size_t horizon = 1;

  void validate() const;
};

/// Throws std::out_of_range unless 1 <= k <= horizon.
double gamma_at(const ScheduleSpec& s, std::size_t k);
double alpha_at(const ScheduleSpec& s, std::size_t k);

/// 0.75 n^{-3/4}: inside (1/(2 n^{3/4}), 1/n^{3/4}), the stepsize range of the
/// vanishing-alpha rate.
double theory_gamma(std::size_t n);

std::string_view gamma_kind_name(GammaKind k);
GammaKind parse_gamma_kind(std::string_view name);
std::string_view alpha_kind_name(AlphaKind k);
AlphaKind parse_alpha_kind(std::string_view name);

}  // namespace scion
