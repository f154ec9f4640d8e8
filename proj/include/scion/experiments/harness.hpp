// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "scion/experiments/problems.hpp"
#include "scion/models/mlp.hpp"
#include "scion/models/presets.hpp"
#include "scion/optim/optimizer.hpp"

namespace scion {

/// Thrown when the loss or a parameter becomes non-finite. `step` is 1-based.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(std::size_t step, const std::string& what);
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

/// Runs fn(0..n-1) on up to `threads` workers (0 = hardware concurrency).
/// Results must be written by index; the first exception is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, std::size_t threads = 0);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

// ---- training with diagnostics ---------------------------------------------------

/// Quantities at iterate x^k, before step k is applied. est_error is
/// ||d^k - g_hat(x^k)||_2 where d^k already includes the gradient at x^k and
/// g_hat is a large-batch gradient; NaN for algorithms without a running
/// estimate.
struct StepRecord {
  std::size_t k = 0;
  double gamma = 0.0;
  double alpha = 0.0;
  double loss = 0.0;
  double grad_dual = 0.0;
  double fw_gap = 0.0;
  double param_norm = 0.0;
  double est_error = std::numeric_limits<double>::quiet_NaN();
  bool feasible = true;
};

struct RunDiagnostics {
  std::vector<StepRecord> records;
  /// True when g_hat is a minibatch estimate rather than the exact gradient.
  bool est_error_is_proxy = true;
};

struct TrainSpec {
  std::vector<LayerSpec> layers;
  OptimizerConfig opt;
  LossKind loss = LossKind::Logistic;
  std::size_t batch = 32;
  /// g_hat uses batch * proxy_factor samples (capped at the training set).
  std::size_t proxy_factor = 16;
  bool diagnostics = true;
  std::uint64_t seed = 0;
};

struct TrainResult {
  MlpModel init;
  MlpModel model;
  RunDiagnostics diag;
  double final_train_loss = 0.0;
  double final_test_loss = std::numeric_limits<double>::quiet_NaN();
  double test_accuracy = std::numeric_limits<double>::quiet_NaN();
  double final_param_norm = 0.0;
};

/// Runs opt.schedule.horizon steps. The model is initialised from
/// derive_seed(seed, 0) unless `init` is given; minibatches come from
/// derive_seed(seed, 1) and the g_hat batches from derive_seed(seed, 2).
TrainResult train(const TrainSpec& spec, const Dataset& data, const MlpModel* init = nullptr);

double accuracy(const MlpModel& model, const Batch& batch);

// ---- coordinate check -------------------------------------------------------------------

struct CoordCheckSpec {
  std::vector<std::size_t> widths{64, 256, 1024};
  std::size_t depth = 3;
  double gamma = 0.01;
  std::size_t samples = 32;
  std::size_t input_dim = 32;
  std::size_t output_dim = 10;
  Activation activation = Activation::Tanh;
  LmoOptions lmo;
  std::uint64_t seed = 0;

  void validate() const;
};

/// RMS over coordinates of the change in layer l's pre-activation after one
/// uSCG step (alpha = 1) on one sample, root-mean-squared over `samples` seeds.
struct CoordRow {
  std::size_t width = 0;
  std::size_t layer = 0;  // 1-based
  double rms = 0.0;
};

std::vector<CoordRow> coordinate_check(const CoordCheckSpec& spec);

/// Max over layers of (max / min across widths) of the per-layer RMS.
double coord_width_ratio(const std::vector<CoordRow>& rows);

// ---- learning-rate transfer sweep ---------------------------------------------------------

struct SweepSpec {
  std::vector<std::size_t> widths{128, 512};
  double gamma_min = 1.0 / 8;
  std::size_t grid_points = 8;
  std::size_t depth = 3;
  SyntheticClassification data;
  NormFamily family = NormFamily::Sign;
  Activation activation = Activation::ReLU;
  Algo algo = Algo::USCG;
  double alpha = 0.1;
  std::size_t epochs = 2;
  std::size_t batch = 32;
  LossKind loss = LossKind::Logistic;
  LmoOptions lmo;
  std::uint64_t seed = 0;

  void validate() const;
  /// gamma_min * 2^i, i = 0..grid_points-1.
  std::vector<double> grid() const;
  std::size_t steps() const;
};

struct SweepRow {
  std::size_t width = 0;
  double gamma = 0.0;
  double final_loss = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  /// Per width, in spec order: grid index of the lowest final loss.
  std::vector<std::size_t> best_index;
  std::vector<double> best_gamma;
  /// max - min of best_index across widths.
  std::size_t spread = 0;
};

SweepResult lr_transfer_sweep(const SweepSpec& spec);

// ---- convergence-rate harness ----------------------------------------------------------------

enum class RateMode { ConstantAlpha, VanishingAlpha };

std::string_view rate_mode_name(RateMode m);
RateMode parse_rate_mode(std::string_view name);

struct RateSpec {
  Algo algo = Algo::USCG;  // USCG or SCG
  RateMode mode = RateMode::VanishingAlpha;
  double alpha = 0.1;
  std::vector<std::size_t> n_list{100, 400, 1600, 6400};
  std::size_t trials = 10;
  StochasticQuadratic problem;
  LmoOptions lmo;
  std::uint64_t seed = 0;

  void validate() const;
};

/// measure is the trial mean of (1/n) sum_k M(x^k): M is the composite dual
/// norm of the exact gradient for uSCG and the Frank-Wolfe gap for SCG.
struct RatePoint {
  std::size_t n = 0;
  double gamma = 0.0;
  double measure = 0.0;
  double initial = 0.0;
  double final_measure = 0.0;
};

struct RateResult {
  std::vector<RatePoint> points;
  /// Vanishing alpha: log-log slope of measure against n.
  double slope = std::numeric_limits<double>::quiet_NaN();
  /// Constant alpha: mean measure over the second half of a run of the
  /// largest n, at sigma and at 2 sigma.
  double plateau = std::numeric_limits<double>::quiet_NaN();
  double plateau_2sigma = std::numeric_limits<double>::quiet_NaN();
  double plateau_ratio = std::numeric_limits<double>::quiet_NaN();
};

/// True when 1/(2 n^{3/4}) < gamma < 1/n^{3/4}.
bool gamma_in_theorem_interval(double gamma, std::size_t n);

/// One trial on the quadratic: per-step measure M(x^k), k = 1..n.
std::vector<double> rate_trajectory(const RateSpec& spec, const StochasticQuadratic& problem,
                                    std::size_t n, double gamma, std::uint64_t trial_seed);

RateResult rate_harness(const RateSpec& spec);

// ---- estimator-error probe ------------------------------------------------------------------

struct ProbeSpec {
  std::size_t n = 4096;
  std::size_t trials = 20;
  AlphaKind alpha_kind = AlphaKind::Vanishing;
  double alpha = 1.0;
  /// Negative selects theory_gamma(n).
  double gamma = -1.0;
  StochasticQuadratic problem;
  LmoOptions lmo;
  std::uint64_t seed = 0;

  void validate() const;
};

struct ProbeResult {
  /// Trial mean of ||d^k - grad f(x^k)||_2^2, k = 1..n.
  std::vector<double> mean_sq_error;
  /// Log-spaced bins [2^j, 2^{j+1}): geometric centre and mean.
  std::vector<double> bin_k;
  std::vector<double> bin_mean;
  double slope = std::numeric_limits<double>::quiet_NaN();
  double gamma = 0.0;
};

ProbeResult error_decay_probe(const ProbeSpec& spec);

}  // namespace scion
