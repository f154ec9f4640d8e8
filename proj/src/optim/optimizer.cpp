// SPDX-License-Identifier: Apache-2.0
#include "scion/optim/optimizer.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace scion {

namespace {

constexpr std::array<std::pair<Algo, std::string_view>, 9> kAlgoNames{{
    {Algo::USCG, "uscg"},
    {Algo::SCG, "scg"},
    {Algo::USCG_WD, "uscg-wd"},
    {Algo::ALMOND, "almond"},
    {Algo::MUON_PLAIN, "muon"},
    {Algo::MUON_NESTEROV, "muon-nesterov"},
    {Algo::SSD, "ssd"},
    {Algo::SCION_LIGHT, "scion-light"},
    {Algo::SGD, "sgd"},
}};

constexpr double kFeasibilitySlack = 1e-6;

void check_gamma(double gamma) {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    throw std::invalid_argument("step size must be finite and nonnegative");
  }
}

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in (0, 1]");
}

void ensure_buffer(ParamList& d, const ParamList& like) {
  if (d.empty()) d = zeros_like(like);
  require_same_shapes(d, like, "optimizer buffer");
}

void average_into(ParamList& d, const ParamList& g, double alpha) {
  for (std::size_t i = 0; i < d.size(); ++i) axpby(alpha, g[i], 1.0 - alpha, d[i]);
}

double effective_alpha(const OptimizerState& st, double alpha) {
  return st.step == 0 && st.first_alpha_one ? 1.0 : alpha;
}

}  // namespace

std::string_view algo_name(Algo a) {
  for (const auto& [algo, name] : kAlgoNames) {
    if (algo == a) return name;
  }
  return "?";
}

Algo parse_algo(std::string_view name) {
  for (const auto& [algo, n] : kAlgoNames) {
    if (n == name) return algo;
  }
  std::string options;
  for (const auto& [algo, n] : kAlgoNames) options += (options.empty() ? "" : "|") + std::string(n);
  throw std::invalid_argument("unknown optimizer '" + std::string(name) + "' (expected " + options +
                              ")");
}

OptimizerState make_state(Algo algo, const ParamList& params) {
  OptimizerState st;
  st.algo = algo;
  st.d = zeros_like(params);
  st.light_mode = algo == Algo::SCION_LIGHT;
  return st;
}

ParamList momentum_update(const ParamList& d, const ParamList& g, double alpha) {
  check_alpha(alpha);
  require_same_shapes(d, g, "momentum_update");
  ParamList out = d;
  average_into(out, g, alpha);
  return out;
}

void uscg_step(ParamList& x, OptimizerState& st, const ParamList& g, double gamma, double alpha,
               const ModelNormSpec& spec, const LmoOptions& opts) {
  check_gamma(gamma);
  check_alpha(alpha);
  require_same_shapes(x, g, "uscg_step");
  ensure_buffer(st.d, g);
  average_into(st.d, g, effective_alpha(st, alpha));
  const ParamList l = composite_lmo(st.d, spec, opts);
  for (std::size_t i = 0; i < x.size(); ++i) axpy(gamma, l[i], x[i]);
  ++st.step;
}

void scg_step(ParamList& x, OptimizerState& st, const ParamList& g, double gamma, double alpha,
              const ModelNormSpec& spec, const LmoOptions& opts, bool check_feasible) {
  check_gamma(gamma);
  check_alpha(alpha);
  if (gamma > 1.0) throw std::domain_error("SCG step size must lie in [0, 1]");
  require_same_shapes(x, g, "scg_step");
  if (check_feasible) {
    const double n = composite_norm(x, spec);
    if (n > 1.0 + kFeasibilitySlack) {
      throw std::domain_error("SCG iterate is infeasible (composite norm " + std::to_string(n) +
                              " > 1); initialize inside the norm ball");
    }
  }
  ensure_buffer(st.d, g);
  average_into(st.d, g, effective_alpha(st, alpha));
  const ParamList l = composite_lmo(st.d, spec, opts);
  for (std::size_t i = 0; i < x.size(); ++i) axpby(gamma, l[i], 1.0 - gamma, x[i]);
  ++st.step;
}

void uscg_wd_step(ParamList& x, OptimizerState& st, const ParamList& g, double gamma, double alpha,
                  double mu, const ModelNormSpec& spec, const LmoOptions& opts) {
  check_gamma(gamma);
  check_alpha(alpha);
  if (!(mu >= 0.0 && mu <= 1.0)) throw std::invalid_argument("weight decay mu must lie in [0, 1]");
  require_same_shapes(x, g, "uscg_wd_step");
  ensure_buffer(st.d, g);
  average_into(st.d, g, effective_alpha(st, alpha));
  const ParamList l = composite_lmo(st.d, spec, opts);
  for (std::size_t i = 0; i < x.size(); ++i) axpby(gamma, l[i], 1.0 - gamma * mu, x[i]);
  ++st.step;
}

void almond_step(ParamList& x, OptimizerState& st, const ParamList& g, double gamma, double alpha,
                 const ModelNormSpec& spec, const LmoOptions& opts) {
  check_gamma(gamma);
  check_alpha(alpha);
  require_same_shapes(x, g, "almond_step");
  ensure_buffer(st.d, g);
  average_into(st.d, composite_lmo(g, spec, opts), alpha);
  for (std::size_t i = 0; i < x.size(); ++i) axpy(gamma, st.d[i], x[i]);
  ++st.step;
}

void muon_step(ParamList& x, OptimizerState& st, const ParamList& g, double gamma, double beta,
               bool nesterov, const ModelNormSpec& spec, const LmoOptions& opts) {
  check_gamma(gamma);
  if (!(beta >= 0.0 && beta < 1.0)) throw std::invalid_argument("momentum beta must lie in [0, 1)");
  require_same_shapes(x, g, "muon_step");
  ensure_buffer(st.d, g);
  for (std::size_t i = 0; i < g.size(); ++i) axpby(1.0, g[i], beta, st.d[i]);
  ParamList l;
  if (nesterov) {
    ParamList look = g;
    for (std::size_t i = 0; i < g.size(); ++i) axpy(beta, st.d[i], look[i]);
    l = composite_lmo(look, spec, opts);
  } else {
    l = composite_lmo(st.d, spec, opts);
  }
  for (std::size_t i = 0; i < x.size(); ++i) axpy(gamma, l[i], x[i]);
  ++st.step;
}

void ssd_step(ParamList& x, const ParamList& g, double gamma, const ModelNormSpec& spec,
              const LmoOptions& opts) {
  check_gamma(gamma);
  require_same_shapes(x, g, "ssd_step");
  const ParamList sh = composite_sharp(g, spec, opts);
  for (std::size_t i = 0; i < x.size(); ++i) axpy(-gamma, sh[i], x[i]);
}

void accumulate_gradient(ParamList& gbuf, const ParamList& g) {
  ensure_buffer(gbuf, g);
  for (std::size_t i = 0; i < g.size(); ++i) gbuf[i] += g[i];
}

void scion_light_update(ParamList& x, ParamList& gbuf, double gamma, double alpha,
                        const ModelNormSpec& spec, const LmoOptions& opts) {
  check_gamma(gamma);
  check_alpha(alpha);
  require_same_shapes(x, gbuf, "scion_light_update");
  const ParamList l = composite_lmo(gbuf, spec, opts);
  for (std::size_t i = 0; i < x.size(); ++i) axpy(gamma, l[i], x[i]);
  for (auto& b : gbuf) b *= 1.0 - alpha;
}

Optimizer::Optimizer(OptimizerConfig cfg, ModelNormSpec spec, const ParamList& params)
    : cfg_(std::move(cfg)), spec_(std::move(spec)) {
  spec_.validate();
  spec_.check_params(params);
  cfg_.schedule.validate();
  if (!(cfg_.wd_mu >= 0.0 && cfg_.wd_mu <= 1.0)) {
    throw std::invalid_argument("weight decay mu must lie in [0, 1]");
  }
  if (!(cfg_.beta >= 0.0 && cfg_.beta < 1.0)) {
    throw std::invalid_argument("momentum beta must lie in [0, 1)");
  }
  if (cfg_.lmo.ns_iters < 0) throw std::invalid_argument("Newton-Schulz iterations must be >= 0");
  state_ = make_state(cfg_.algo, params);
  state_.wd_mu = cfg_.wd_mu;
  state_.first_alpha_one = cfg_.first_alpha_one;
}

void Optimizer::step(ParamList& x, const ParamList& g) {
  const std::size_t k = state_.step + 1;
  const double gamma = gamma_at(cfg_.schedule, k);
  const double alpha = alpha_at(cfg_.schedule, k);
  last_gamma_ = gamma;
  last_alpha_ = effective_alpha(state_, alpha);
  switch (cfg_.algo) {
    case Algo::USCG:
      uscg_step(x, state_, g, gamma, alpha, spec_, cfg_.lmo);
      break;
    case Algo::SCG:
      scg_step(x, state_, g, gamma, alpha, spec_, cfg_.lmo, cfg_.check_feasible);
      break;
    case Algo::USCG_WD:
      uscg_wd_step(x, state_, g, gamma, alpha, cfg_.wd_mu, spec_, cfg_.lmo);
      break;
    case Algo::ALMOND:
      last_alpha_ = alpha;
      almond_step(x, state_, g, gamma, alpha, spec_, cfg_.lmo);
      break;
    case Algo::MUON_PLAIN:
    case Algo::MUON_NESTEROV:
      last_alpha_ = 1.0 - cfg_.beta;
      muon_step(x, state_, g, gamma, cfg_.beta, cfg_.algo == Algo::MUON_NESTEROV, spec_, cfg_.lmo);
      break;
    case Algo::SSD:
      last_alpha_ = 1.0;
      ssd_step(x, g, gamma, spec_, cfg_.lmo);
      ++state_.step;
      break;
    case Algo::SCION_LIGHT:
      last_alpha_ = alpha;
      accumulate_gradient(state_.d, g);
      scion_light_update(x, state_.d, gamma, alpha, spec_, cfg_.lmo);
      ++state_.step;
      break;
    case Algo::SGD:
      last_alpha_ = 1.0;
      check_gamma(gamma);
      require_same_shapes(x, g, "sgd");
      for (std::size_t i = 0; i < x.size(); ++i) axpy(-gamma, g[i], x[i]);
      ++state_.step;
      break;
  }
}

bool Optimizer::gradient_estimate(ParamList& out) const {
  switch (cfg_.algo) {
    case Algo::USCG:
    case Algo::SCG:
    case Algo::USCG_WD:
      out = state_.d;
      return true;
    case Algo::MUON_PLAIN:
    case Algo::MUON_NESTEROV:
      out = state_.d;
      for (auto& m : out) m *= 1.0 - cfg_.beta;
      return true;
    default:
      return false;
  }
}

}  // namespace scion
