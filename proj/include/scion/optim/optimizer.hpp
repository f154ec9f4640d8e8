// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string_view>

#include "scion/linalg/matrix.hpp"
#include "scion/lmo/lmo.hpp"
#include "scion/optim/schedule.hpp"

namespace scion {

enum class Algo {
  USCG,
  SCG,
  USCG_WD,
  ALMOND,
  MUON_PLAIN,
  MUON_NESTEROV,
  SSD,
  SCION_LIGHT,
  /// Plain stochastic gradient descent, a reference curve only.
  SGD,
};

std::string_view algo_name(Algo a);
Algo parse_algo(std::string_view name);

struct OptimizerState {
  /// Averaged direction d^k. Holds the momentum buffer G for Muon and the
  /// gradient accumulation buffer for ScionLight.
  ParamList d;
  std::size_t step = 0;
  Algo algo = Algo::USCG;
  double wd_mu = 0.0;
  bool light_mode = false;
  /// Take alpha = 1 on the first step (d^1 = g^1). Turning it off makes d^k
  /// proportional to Muon's G^k, which the equivalence tests rely on.
  bool first_alpha_one = true;
};

OptimizerState make_state(Algo algo, const ParamList& params);

/// (1 - alpha) d + alpha g.
ParamList momentum_update(const ParamList& d, const ParamList& g, double alpha);

// Step functions mutate x and state in place. `spec` is the composite norm;
// each layer moves by rho_l * lmo_l of its own direction.

void uscg_step(ParamList& x, OptimizerState& st, const ParamList& g, double gamma, double alpha,
               const ModelNormSpec& spec, const LmoOptions& opts = {});

/// Throws std::domain_error if x is infeasible (composite norm > 1 + 1e-6)
/// or gamma is outside [0, 1].
void scg_step(ParamList& x, OptimizerState& st, const ParamList& g, double gamma, double alpha,
              const ModelNormSpec& spec, const LmoOptions& opts = {}, bool check_feasible = true);

void uscg_wd_step(ParamList& x, OptimizerState& st, const ParamList& g, double gamma, double alpha,
                  double mu, const ModelNormSpec& spec, const LmoOptions& opts = {});

/// d <- (1 - alpha) d + alpha lmo(g); x <- x + gamma d.
void almond_step(ParamList& x, OptimizerState& st, const ParamList& g, double gamma, double alpha,
                 const ModelNormSpec& spec, const LmoOptions& opts = {});

/// G <- g + beta G, then x += gamma lmo(g + beta G) (nesterov) or gamma lmo(G).
void muon_step(ParamList& x, OptimizerState& st, const ParamList& g, double gamma, double beta,
               bool nesterov, const ModelNormSpec& spec, const LmoOptions& opts = {});

/// x <- x - gamma g#, with # the sharp operator of the composite norm.
void ssd_step(ParamList& x, const ParamList& g, double gamma, const ModelNormSpec& spec,
              const LmoOptions& opts = {});

/// gbuf += g. Backprop accumulates into the same buffer ScionLight decays.
void accumulate_gradient(ParamList& gbuf, const ParamList& g);

/// x <- x + gamma lmo(gbuf); gbuf <- (1 - alpha) gbuf.
void scion_light_update(ParamList& x, ParamList& gbuf, double gamma, double alpha,
                        const ModelNormSpec& spec, const LmoOptions& opts = {});

struct OptimizerConfig {
  Algo algo = Algo::USCG;
  ScheduleSpec schedule;
  double wd_mu = 0.0;
  /// Muon momentum.
  double beta = 0.9;
  bool first_alpha_one = true;
  bool check_feasible = true;
  LmoOptions lmo;
};

/// Schedule-driven front end over the step functions.
class Optimizer {
 public:
  Optimizer(OptimizerConfig cfg, ModelNormSpec spec, const ParamList& params);

  /// Applies update k = step() + 1 with gradient g.
  void step(ParamList& x, const ParamList& g);

  std::size_t steps_taken() const { return state_.step; }
  double last_gamma() const { return last_gamma_; }
  double last_alpha() const { return last_alpha_; }
  const OptimizerState& state() const { return state_; }
  const OptimizerConfig& config() const { return cfg_; }
  const ModelNormSpec& norm_spec() const { return spec_; }

  /// Current gradient estimate implied by the optimizer state, used for the
  /// estimator-error proxy; false if the algorithm keeps none.
  bool gradient_estimate(ParamList& out) const;

 private:
  OptimizerConfig cfg_;
  ModelNormSpec spec_;
  OptimizerState state_;
  double last_gamma_ = 0.0;
  double last_alpha_ = 0.0;
};

}  // namespace scion
