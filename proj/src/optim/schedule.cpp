// SPDX-License-Identifier: Apache-2.0
#include "scion/optim/schedule.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace scion {

void ScheduleSpec::validate() const {
  if (horizon == 0) throw std::invalid_argument("schedule horizon must be positive");
  if (!(gamma0 >= 0.0) || !std::isfinite(gamma0)) {
    throw std::invalid_argument("gamma0 must be finite and nonnegative");
  }
  if (gamma_kind == GammaKind::ConstantThenLinear && (warmdown == 0 || warmdown > horizon)) {
    throw std::invalid_argument("warmdown must be in [1, horizon]");
  }
  if (alpha_kind == AlphaKind::Constant && !(alpha0 > 0.0 && alpha0 <= 1.0)) {
    throw std::invalid_argument("alpha must lie in (0, 1]");
  }
}

namespace {

void check_k(const ScheduleSpec& s, std::size_t k) {
  if (k < 1 || k > s.horizon) {
    throw std::out_of_range("step " + std::to_string(k) + " outside schedule [1, " +
                            std::to_string(s.horizon) + "]");
  }
}

}  // namespace

double gamma_at(const ScheduleSpec& s, std::size_t k) {
  check_k(s, k);
  const double n = static_cast<double>(s.horizon);
  const double kk = static_cast<double>(k);
  switch (s.gamma_kind) {
    case GammaKind::Constant:
      return s.gamma0;
    case GammaKind::LinearDecay:
      return s.gamma0 * (1.0 - kk / n);
    case GammaKind::ConstantThenLinear: {
      const std::size_t start = s.horizon - s.warmdown;
      if (k <= start) return s.gamma0;
      return s.gamma0 * (n - kk) / static_cast<double>(s.warmdown);
    }
  }
  return s.gamma0;
}

double alpha_at(const ScheduleSpec& s, std::size_t k) {
  check_k(s, k);
  if (s.alpha_kind == AlphaKind::Vanishing) return 1.0 / std::sqrt(static_cast<double>(k));
  return s.alpha0;
}

double theory_gamma(std::size_t n) {
  if (n == 0) throw std::invalid_argument("theory_gamma needs n >= 1");
  return 0.75 * std::pow(static_cast<double>(n), -0.75);
}

std::string_view gamma_kind_name(GammaKind k) {
  switch (k) {
    case GammaKind::Constant: return "constant";
    case GammaKind::LinearDecay: return "linear";
    case GammaKind::ConstantThenLinear: return "constant-then-linear";
  }
  return "?";
}

GammaKind parse_gamma_kind(std::string_view name) {
  for (GammaKind k : {GammaKind::Constant, GammaKind::LinearDecay, GammaKind::ConstantThenLinear}) {
    if (gamma_kind_name(k) == name) return k;
  }
  throw std::invalid_argument("unknown gamma schedule '" + std::string(name) +
                              "' (expected constant|linear|constant-then-linear)");
}

std::string_view alpha_kind_name(AlphaKind k) {
  return k == AlphaKind::Constant ? "constant" : "vanishing";
}

AlphaKind parse_alpha_kind(std::string_view name) {
  if (name == "constant") return AlphaKind::Constant;
  if (name == "vanishing") return AlphaKind::Vanishing;
  throw std::invalid_argument("unknown alpha schedule '" + std::string(name) +
                              "' (expected constant|vanishing)");
}

}  // namespace scion
