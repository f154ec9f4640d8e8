// SPDX-License-Identifier: Apache-2.0
#include "scion/experiments/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "scion/lmo/lmo.hpp"

namespace scion {

NumericalError::NumericalError(std::size_t step, const std::string& what)
    : std::runtime_error("numerical failure at step " + std::to_string(step) + ": " + what), step_(step) {}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, std::size_t threads) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex mu;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!err) err = std::current_exception();
          next = n;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("slope fit needs >= 2 points");
  double mx = 0, my = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

// ---- training ------------------------------------------------------------------------

namespace {

bool params_finite(const ParamList& p) {
  return std::all_of(p.begin(), p.end(), [](const Matrix& m) { return all_finite(m); });
}

double distance(const ParamList& a, const ParamList& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double f = frobenius_norm(a[i] - b[i]);
    s += f * f;
  }
  return std::sqrt(s);
}

}  // namespace

double accuracy(const MlpModel& model, const Batch& batch) {
  const Matrix logits = forward(model, batch.x).logits();
  std::size_t hit = 0;
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    auto r = logits.row(i);
    const auto best = static_cast<std::size_t>(std::max_element(r.begin(), r.end()) - r.begin());
    hit += best == batch.labels[i] ? 1 : 0;
  }
  return static_cast<double>(hit) / static_cast<double>(logits.rows());
}

TrainResult train(const TrainSpec& spec, const Dataset& data, const MlpModel* init) {
  validate_layers(spec.layers);
  spec.opt.schedule.validate();
  if (spec.batch == 0) throw std::invalid_argument("batch must be >= 1");
  if (data.train.size() == 0) throw std::invalid_argument("training set is empty");
  if (spec.layers.front().d_in != data.input_dim()) {
    throw std::invalid_argument("model input dim " + std::to_string(spec.layers.front().d_in) +
                                " does not match data dim " + std::to_string(data.input_dim()));
  }
  if (spec.loss == LossKind::MSE && spec.layers.back().d_out != data.train.targets.cols()) {
    throw std::invalid_argument("model output dim does not match target dim");
  }
  if (spec.loss == LossKind::Logistic && spec.layers.back().d_out < data.classes) {
    throw std::invalid_argument("model output dim is smaller than the number of classes");
  }

  TrainResult res;
  res.init = init ? *init : init_model(spec.layers, derive_seed(spec.seed, 0));
  MlpModel model = res.init;
  const ModelNormSpec ns = model.norm_spec();
  Optimizer opt(spec.opt, ns, model.params());
  Rng rb(derive_seed(spec.seed, 1));
  Rng rp(derive_seed(spec.seed, 2));
  const std::size_t proxy = spec.batch * std::max<std::size_t>(spec.proxy_factor, 1);
  const bool full = proxy >= data.train.size();
  res.diag.est_error_is_proxy = !full;

  const std::size_t n = spec.opt.schedule.horizon;
  res.diag.records.reserve(n);
  for (std::size_t k = 1; k <= n; ++k) {
    const Batch b = sample_batch(data.train, spec.batch, rb);
    LossAndGrad lg = loss_and_grad(model, b, spec.loss);
    if (!std::isfinite(lg.loss)) throw NumericalError(k, "non-finite loss");
    StepRecord r;
    r.k = k;
    r.loss = lg.loss;
    ParamList ghat;
    if (spec.diagnostics) {
      ghat = full ? loss_and_grad(model, data.train, spec.loss).grad
                  : loss_and_grad(model, sample_batch(data.train, proxy, rp), spec.loss).grad;
      r.grad_dual = composite_dual_norm(ghat, ns, spec.opt.lmo);
      r.fw_gap = fw_gap(ghat, model.params(), ns, spec.opt.lmo);
      r.param_norm = composite_norm(model.params(), ns);
      r.feasible = r.param_norm <= 1.0 + 1e-8;
    }
    opt.step(model.params(), lg.grad);
    r.gamma = opt.last_gamma();
    r.alpha = opt.last_alpha();
    if (spec.diagnostics) {
      ParamList d;
      if (opt.gradient_estimate(d)) r.est_error = distance(d, ghat);
    }
    if (!params_finite(model.params())) throw NumericalError(k, "non-finite parameter");
    res.diag.records.push_back(r);
  }
  res.final_train_loss = loss_only(model, data.train, spec.loss);
  if (data.test.size() > 0) {
    res.final_test_loss = loss_only(model, data.test, spec.loss);
    if (spec.loss == LossKind::Logistic) res.test_accuracy = accuracy(model, data.test);
  }
  res.final_param_norm = composite_norm(model.params(), ns);
  res.model = std::move(model);
  return res;
}

// ---- coordinate check -------------------------------------------------------------

void CoordCheckSpec::validate() const {
  if (widths.size() < 2) throw std::invalid_argument("coordinate check needs >= 2 widths");
  for (auto w : widths) {
    if (w == 0) throw std::invalid_argument("widths must be positive");
  }
  if (depth < 2) throw std::invalid_argument("coordinate check depth must be >= 2");
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw std::invalid_argument("gamma must be >= 0");
  if (samples == 0) throw std::invalid_argument("samples must be >= 1");
  if (input_dim == 0 || output_dim == 0) throw std::invalid_argument("input/output dims must be positive");
}

std::vector<CoordRow> coordinate_check(const CoordCheckSpec& spec) {
  spec.validate();
  const std::size_t W = spec.widths.size();
  const std::size_t S = spec.samples;
  // sumsq[(w * S + s) * depth + l]
  std::vector<double> sumsq(W * S * spec.depth, 0.0);
  parallel_for(W * S, [&](std::size_t job) {
    const std::size_t wi = job / S;
    const std::size_t s = job % S;
    const std::size_t width = spec.widths[wi];
    std::vector<std::size_t> dims{spec.input_dim};
    for (std::size_t l = 0; l + 1 < spec.depth; ++l) dims.push_back(width);
    dims.push_back(spec.output_dim);
    BuildOptions o;
    o.hidden = spec.activation;
    const auto layers = build_config(Domain::Image, dims, o);
    const std::uint64_t ss = derive_seed(derive_seed(spec.seed, width), s);
    MlpModel model = init_model(layers, derive_seed(ss, 0));
    Rng rng(derive_seed(ss, 1));
    Batch b;
    b.x = gaussian_matrix(1, spec.input_dim, rng);
    b.x *= 1.0 / vec_norm(b.x.values(), VecNorm::RMS);
    b.labels = {static_cast<std::size_t>(rng.below(spec.output_dim))};
    b.targets = Matrix(1, spec.output_dim);
    b.targets(0, b.labels[0]) = 1.0;

    const ForwardCache before = forward(model, b.x);
    const LossAndGrad lg = loss_and_grad(model, b, LossKind::Logistic);
    OptimizerState st = make_state(Algo::USCG, model.params());
    uscg_step(model.params(), st, lg.grad, spec.gamma, 1.0, model.norm_spec(), spec.lmo);
    const ForwardCache after = forward(model, b.x);
    for (std::size_t l = 0; l < spec.depth; ++l) {
      const Matrix diff = after.f[l] - before.f[l];
      const double f = frobenius_norm(diff);
      sumsq[job * spec.depth + l] = f * f / static_cast<double>(diff.size());
    }
  });
  std::vector<CoordRow> rows;
  for (std::size_t wi = 0; wi < W; ++wi) {
    for (std::size_t l = 0; l < spec.depth; ++l) {
      double m = 0.0;
      for (std::size_t s = 0; s < S; ++s) m += sumsq[(wi * S + s) * spec.depth + l];
      rows.push_back({spec.widths[wi], l + 1, std::sqrt(m / static_cast<double>(S))});
    }
  }
  return rows;
}

double coord_width_ratio(const std::vector<CoordRow>& rows) {
  std::size_t depth = 0;
  for (const auto& r : rows) depth = std::max(depth, r.layer);
  double worst = 1.0;
  for (std::size_t l = 1; l <= depth; ++l) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const auto& r : rows) {
      if (r.layer != l) continue;
      lo = std::min(lo, r.rms);
      hi = std::max(hi, r.rms);
    }
    if (hi == 0.0) continue;
    worst = std::max(worst, hi / lo);
  }
  return worst;
}

// ---- learning-rate sweep -------------------------------------------------------------------

void SweepSpec::validate() const {
  if (widths.empty()) throw std::invalid_argument("sweep needs at least one width");
  for (auto w : widths) {
    if (w == 0) throw std::invalid_argument("widths must be positive");
  }
  if (!(gamma_min > 0.0) || !std::isfinite(gamma_min)) throw std::invalid_argument("gamma_min must be > 0");
  if (grid_points == 0) throw std::invalid_argument("grid_points must be >= 1");
  if (depth < 1) throw std::invalid_argument("depth must be >= 1");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must be in (0, 1]");
  if (epochs == 0 || batch == 0) throw std::invalid_argument("epochs and batch must be >= 1");
  data.validate();
}

std::vector<double> SweepSpec::grid() const {
  std::vector<double> g(grid_points);
  for (std::size_t i = 0; i < grid_points; ++i) g[i] = std::ldexp(gamma_min, static_cast<int>(i));
  return g;
}

std::size_t SweepSpec::steps() const {
  return std::max<std::size_t>(1, epochs * data.n_train / batch);
}

SweepResult lr_transfer_sweep(const SweepSpec& spec) {
  spec.validate();
  const Dataset data = gen_synthetic(spec.data, derive_seed(spec.seed, 0));
  const auto grid = spec.grid();
  const std::size_t G = grid.size();
  SweepResult res;
  res.rows.resize(spec.widths.size() * G);
  parallel_for(res.rows.size(), [&](std::size_t job) {
    const std::size_t wi = job / G;
    const std::size_t gi = job % G;
    const std::size_t width = spec.widths[wi];
    std::vector<std::size_t> dims{data.input_dim()};
    for (std::size_t l = 0; l + 1 < spec.depth; ++l) dims.push_back(width);
    dims.push_back(data.classes);
    BuildOptions o;
    o.family = spec.family;
    o.hidden = spec.activation;
    TrainSpec ts;
    ts.layers = build_config(Domain::Image, dims, o);
    ts.opt.algo = spec.algo;
    ts.opt.lmo = spec.lmo;
    ts.opt.schedule.gamma_kind = GammaKind::LinearDecay;
    ts.opt.schedule.gamma0 = grid[gi];
    ts.opt.schedule.alpha_kind = AlphaKind::Constant;
    ts.opt.schedule.alpha0 = spec.alpha;
    ts.opt.schedule.horizon = spec.steps();
    ts.opt.check_feasible = false;
    ts.loss = spec.loss;
    ts.batch = spec.batch;
    ts.diagnostics = false;
    // Same init and batch order for every gamma at a given width.
    ts.seed = derive_seed(spec.seed, 1 + width);
    double loss = std::numeric_limits<double>::infinity();
    try {
      loss = train(ts, data).final_train_loss;
    } catch (const NumericalError&) {
    }
    if (!std::isfinite(loss)) loss = std::numeric_limits<double>::infinity();
    res.rows[job] = {width, grid[gi], loss};
  });
  for (std::size_t wi = 0; wi < spec.widths.size(); ++wi) {
    std::size_t best = 0;
    for (std::size_t gi = 1; gi < G; ++gi) {
      if (res.rows[wi * G + gi].final_loss < res.rows[wi * G + best].final_loss) best = gi;
    }
    res.best_index.push_back(best);
    res.best_gamma.push_back(grid[best]);
  }
  const auto [lo, hi] = std::minmax_element(res.best_index.begin(), res.best_index.end());
  res.spread = *hi - *lo;
  return res;
}

// ---- rate harness -------------------------------------------------------------------------------

std::string_view rate_mode_name(RateMode m) {
  return m == RateMode::ConstantAlpha ? "constant" : "vanishing";
}

RateMode parse_rate_mode(std::string_view name) {
  if (name == "constant") return RateMode::ConstantAlpha;
  if (name == "vanishing") return RateMode::VanishingAlpha;
  throw std::invalid_argument("unknown rate mode '" + std::string(name) + "' (expected constant|vanishing)");
}

void RateSpec::validate() const {
  if (algo != Algo::USCG && algo != Algo::SCG) throw std::invalid_argument("rate harness supports uscg and scg");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must be in (0, 1]");
  if (n_list.empty()) throw std::invalid_argument("n_list must not be empty");
  if (mode == RateMode::VanishingAlpha && n_list.size() < 2) {
    throw std::invalid_argument("slope fit needs >= 2 horizons");
  }
  for (auto n : n_list) {
    if (n == 0) throw std::invalid_argument("horizons must be >= 1");
  }
  if (trials == 0) throw std::invalid_argument("trials must be >= 1");
  problem.validate();
}

bool gamma_in_theorem_interval(double gamma, std::size_t n) {
  const double p = std::pow(static_cast<double>(n), 0.75);
  return gamma > 1.0 / (2.0 * p) && gamma < 1.0 / p;
}

std::vector<double> rate_trajectory(const RateSpec& spec, const StochasticQuadratic& problem,
                                    std::size_t n, double gamma, std::uint64_t trial_seed) {
  const ModelNormSpec ns = problem.norm_spec();
  ParamList x{problem.start_point(derive_seed(trial_seed, 0))};
  Rng noise(derive_seed(trial_seed, 1));
  OptimizerState st = make_state(spec.algo, x);
  std::vector<double> out(n);
  for (std::size_t k = 1; k <= n; ++k) {
    const ParamList gex{problem.gradient(x[0])};
    out[k - 1] = spec.algo == Algo::USCG ? composite_dual_norm(gex, ns, spec.lmo) : fw_gap(gex, x, ns, spec.lmo);
    const ParamList g{problem.noisy_gradient(x[0], noise)};
    const double alpha = spec.mode == RateMode::VanishingAlpha ? 1.0 / std::sqrt(static_cast<double>(k)) : spec.alpha;
    if (spec.algo == Algo::USCG) {
      uscg_step(x, st, g, gamma, alpha, ns, spec.lmo);
    } else {
      scg_step(x, st, g, gamma, alpha, ns, spec.lmo);
    }
  }
  return out;
}

namespace {

struct TrialStats {
  double mean = 0.0;
  double tail_mean = 0.0;
  double first = 0.0;
  double last = 0.0;
};

TrialStats summarize(const std::vector<double>& t) {
  TrialStats s;
  double sum = 0.0, tail = 0.0;
  const std::size_t half = t.size() / 2;
  for (std::size_t i = 0; i < t.size(); ++i) {
    sum += t[i];
    if (i >= half) tail += t[i];
  }
  s.mean = sum / static_cast<double>(t.size());
  s.tail_mean = tail / static_cast<double>(t.size() - half);
  s.first = t.front();
  s.last = t.back();
  return s;
}

std::vector<TrialStats> run_trials(const RateSpec& spec, const StochasticQuadratic& problem, std::size_t n,
                                   double gamma) {
  std::vector<TrialStats> stats(spec.trials);
  parallel_for(spec.trials, [&](std::size_t t) {
    stats[t] = summarize(rate_trajectory(spec, problem, n, gamma, derive_seed(derive_seed(spec.seed, n), t)));
  });
  return stats;
}

}  // namespace

RateResult rate_harness(const RateSpec& spec) {
  spec.validate();
  RateResult res;
  std::vector<double> ns, ms;
  for (std::size_t n : spec.n_list) {
    const double gamma = theory_gamma(n);
    if (!gamma_in_theorem_interval(gamma, n)) {
      throw std::logic_error("step size outside the theorem's interval for n = " + std::to_string(n));
    }
    const auto stats = run_trials(spec, spec.problem, n, gamma);
    RatePoint p;
    p.n = n;
    p.gamma = gamma;
    for (const auto& s : stats) {
      p.measure += s.mean;
      p.initial += s.first;
      p.final_measure += s.last;
    }
    const double T = static_cast<double>(stats.size());
    p.measure /= T;
    p.initial /= T;
    p.final_measure /= T;
    res.points.push_back(p);
    ns.push_back(static_cast<double>(n));
    ms.push_back(p.measure);
  }
  if (spec.mode == RateMode::VanishingAlpha) {
    res.slope = loglog_slope(ns, ms);
  } else {
    const std::size_t n = spec.n_list.back();
    const double gamma = theory_gamma(n);
    auto tail = [&](const StochasticQuadratic& q) {
      double m = 0.0;
      for (const auto& s : run_trials(spec, q, n, gamma)) m += s.tail_mean;
      return m / static_cast<double>(spec.trials);
    };
    StochasticQuadratic q2 = spec.problem;
    q2.sigma *= 2.0;
    res.plateau = tail(spec.problem);
    res.plateau_2sigma = tail(q2);
    res.plateau_ratio = res.plateau_2sigma / res.plateau;
  }
  return res;
}

// ---- estimator-error probe -----------------------------------------------------------------------

void ProbeSpec::validate() const {
  if (n < 2) throw std::invalid_argument("probe horizon must be >= 2");
  if (trials == 0) throw std::invalid_argument("trials must be >= 1");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must be in (0, 1]");
  if (!std::isfinite(gamma)) throw std::invalid_argument("gamma must be finite");
  problem.validate();
}

ProbeResult error_decay_probe(const ProbeSpec& spec) {
  spec.validate();
  ProbeResult res;
  res.gamma = spec.gamma < 0.0 ? theory_gamma(spec.n) : spec.gamma;
  const ModelNormSpec ns = spec.problem.norm_spec();
  std::vector<std::vector<double>> per(spec.trials);
  parallel_for(spec.trials, [&](std::size_t t) {
    const std::uint64_t ts = derive_seed(spec.seed, t);
    ParamList x{spec.problem.start_point(derive_seed(ts, 0))};
    Rng noise(derive_seed(ts, 1));
    OptimizerState st = make_state(Algo::USCG, x);
    auto& e = per[t];
    e.resize(spec.n);
    for (std::size_t k = 1; k <= spec.n; ++k) {
      const Matrix gex = spec.problem.gradient(x[0]);
      const ParamList g{spec.problem.noisy_gradient(x[0], noise)};
      const double alpha =
          spec.alpha_kind == AlphaKind::Vanishing ? 1.0 / std::sqrt(static_cast<double>(k)) : spec.alpha;
      uscg_step(x, st, g, res.gamma, alpha, ns, spec.lmo);
      const double f = frobenius_norm(st.d[0] - gex);
      e[k - 1] = f * f;
    }
  });
  res.mean_sq_error.assign(spec.n, 0.0);
  for (const auto& e : per) {
    for (std::size_t k = 0; k < spec.n; ++k) res.mean_sq_error[k] += e[k];
  }
  for (auto& v : res.mean_sq_error) v /= static_cast<double>(spec.trials);
  for (std::size_t lo = 1; lo <= spec.n; lo *= 2) {
    const std::size_t hi = std::min(2 * lo, spec.n + 1);
    double m = 0.0;
    for (std::size_t k = lo; k < hi; ++k) m += res.mean_sq_error[k - 1];
    res.bin_k.push_back(std::sqrt(static_cast<double>(lo) * static_cast<double>(hi - 1)));
    res.bin_mean.push_back(m / static_cast<double>(hi - lo));
  }
  if (res.bin_k.size() >= 2 &&
      std::all_of(res.bin_mean.begin(), res.bin_mean.end(), [](double v) { return v > 0.0; })) {
    res.slope = loglog_slope(res.bin_k, res.bin_mean);
  }
  return res;
}

}  // namespace scion
