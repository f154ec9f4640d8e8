// SPDX-License-Identifier: Apache-2.0
#include "scion/cli/commands.hpp"

#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include "CLI11.hpp"
#include "scion/cli/output.hpp"
#include "scion/experiments/harness.hpp"
#include "scion/experiments/lmo_suite.hpp"
#include "scion/io/format.hpp"
#include "scion/models/checkpoint.hpp"

namespace scion::cli {

namespace {

LmoOptions lmo_options(const Config& cfg) {
  LmoOptions o;
  o.spectral = cfg.get_string("spectral.method") == "exact" ? SpectralMethod::ExactSvd : SpectralMethod::NewtonSchulz;
  o.ns_iters = static_cast<int>(cfg.get_uint("spectral.ns_iters"));
  return o;
}

std::string stem(const Config& cfg) {
  return output_stem(cfg.get_string("out"), cfg.schema().command, cfg.hash(), cfg.get_uint("seed"));
}

/// Runs a domain-level validation step; invalid_argument becomes a ConfigError.
template <class F>
auto checked(F&& f) {
  try {
    return f();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

nlohmann::json summary_head(const Config& cfg) {
  nlohmann::json j;
  j["command"] = cfg.schema().command;
  j["config_hash"] = cfg.hash();
  j["seed"] = cfg.get_uint("seed");
  j["config"] = cfg.tree();
  return j;
}

SyntheticClassification synthetic_from(const Config& cfg) {
  SyntheticClassification s;
  s.dim = cfg.get_uint("problem.dim");
  s.classes = cfg.get_uint("problem.classes");
  s.clusters = cfg.get_uint("problem.clusters");
  s.noise = cfg.get_double("problem.noise");
  s.n_train = cfg.get_uint("problem.n_train");
  s.n_test = cfg.get_uint("problem.n_test");
  return s;
}

StochasticQuadratic quadratic_from(const Config& cfg) {
  StochasticQuadratic q;
  q.dim = cfg.get_uint("problem.dim");
  q.sigma = cfg.get_double("problem.sigma");
  q.conditioning = cfg.get_double("problem.conditioning");
  q.norm = parse_norm_kind(cfg.get_string("problem.norm"));
  q.rho = cfg.get_double("problem.rho");
  return q;
}

}  // namespace

// ---- lmo-check ---------------------------------------------------------------------------

int cmd_lmo_check(const Config& cfg, std::ostream& out) {
  LmoSuiteSpec s;
  s.kinds.clear();
  for (const auto& k : cfg.get_string_list("kinds")) s.kinds.push_back(parse_norm_kind(k));
  s.samples = cfg.get_uint("samples");
  s.max_dim = cfg.get_uint("max_dim");
  s.scales = cfg.get_double_list("scales");
  s.tol_boundary = cfg.get_double("tol.boundary");
  s.tol_boundary_spectral = cfg.get_double("tol.boundary_spectral");
  s.tol_dual = cfg.get_double("tol.dual");
  s.tol_scale = cfg.get_double("tol.scale");
  s.lmo = lmo_options(cfg);
  s.seed = cfg.get_uint("seed");
  checked([&] {
    s.validate();
    return 0;
  });

  const auto rows = run_lmo_suite(s);
  const std::string base = stem(cfg);
  CsvWriter csv(base + ".csv", {"kind", "samples", "boundary_dev", "dual_dev", "scale_dev", "pass"});
  bool all = true;
  double worst_dual = 0.0;
  out << "kind       samples  boundary_dev  dual_dev      scale_dev     result\n";
  nlohmann::json per = nlohmann::json::array();
  for (const auto& r : rows) {
    const std::string name(norm_kind_name(r.kind));
    csv.cell(name).cell(r.samples).cell(r.boundary).cell(r.dual).cell(r.scale).cell(r.pass).end_row();
    char line[160];
    std::snprintf(line, sizeof line, "%-10s %7zu  %.3e     %.3e     %.3e     %s\n", name.c_str(), r.samples,
                  r.boundary, r.dual, r.scale, r.pass ? "ok" : "VIOLATION");
    out << line;
    all = all && r.pass;
    worst_dual = std::max(worst_dual, r.dual);
    per.push_back({{"kind", name},
                   {"boundary_dev", json_number(r.boundary)},
                   {"dual_dev", json_number(r.dual)},
                   {"scale_dev", json_number(r.scale)},
                   {"pass", r.pass}});
  }
  csv.close();
  auto j = summary_head(cfg);
  j["kinds"] = per;
  j["max_dual_dev"] = json_number(worst_dual);
  j["pass"] = all;
  append_jsonl(base + ".jsonl", j);
  out << (all ? "all contracts hold" : "contract violation") << "; max dual-pairing deviation "
      << format_double(worst_dual) << "\n";
  return all ? kExitOk : kExitViolation;
}

// ---- train --------------------------------------------------------------------------------

int cmd_train(const Config& cfg, std::ostream& out) {
  TrainSpec ts;
  const std::uint64_t seed = cfg.get_uint("seed");
  ts.seed = derive_seed(seed, 1);
  ts.batch = cfg.get_uint("train.batch");
  ts.proxy_factor = cfg.get_uint("train.proxy_factor");
  ts.loss = parse_loss(cfg.get_string("train.loss"));

  OptimizerConfig& oc = ts.opt;
  oc.algo = parse_algo(cfg.get_string("optimizer.algo"));
  oc.schedule.gamma_kind = parse_gamma_kind(cfg.get_string("optimizer.gamma_schedule"));
  oc.schedule.gamma0 = cfg.get_double("optimizer.gamma");
  oc.schedule.warmdown = cfg.get_uint("optimizer.warmdown");
  oc.schedule.alpha_kind = parse_alpha_kind(cfg.get_string("optimizer.alpha_schedule"));
  oc.schedule.alpha0 = cfg.get_double("optimizer.alpha");
  oc.schedule.horizon = cfg.get_uint("optimizer.steps");
  oc.wd_mu = cfg.get_double("optimizer.wd_mu");
  oc.beta = cfg.get_double("optimizer.beta");
  oc.first_alpha_one = cfg.get_bool("optimizer.first_alpha_one");
  oc.lmo = lmo_options(cfg);

  const std::string kind = cfg.get_string("problem.kind");
  SyntheticClassification syn = synthetic_from(cfg);
  if (kind == "synthetic") {
    checked([&] {
      syn.validate();
      return 0;
    });
  } else if (cfg.get_string("problem.idx.train_images").empty() || cfg.get_string("problem.idx.train_labels").empty()) {
    throw ConfigError("problem.kind=idx needs problem.idx.train_images and problem.idx.train_labels");
  }
  checked([&] {
    oc.schedule.validate();
    return 0;
  });
  if (oc.algo == Algo::USCG_WD && !(oc.wd_mu > 0.0)) throw ConfigError("config key 'optimizer.wd_mu': uscg-wd needs mu > 0");

  Dataset data;
  if (kind == "synthetic") {
    data = gen_synthetic(syn, derive_seed(seed, 0));
  } else {
    try {
      data = load_idx_dataset(cfg.get_string("problem.idx.train_images"), cfg.get_string("problem.idx.train_labels"),
                              cfg.get_string("problem.idx.test_images"), cfg.get_string("problem.idx.test_labels"));
    } catch (const std::runtime_error& e) {
      throw ConfigError(e.what());
    }
  }

  std::vector<std::size_t> dims{data.input_dim()};
  for (auto w : cfg.get_uint_list("model.widths")) dims.push_back(w);
  dims.push_back(data.classes);
  BuildOptions bo;
  bo.family = parse_family(cfg.get_string("model.family"));
  bo.hidden = parse_activation(cfg.get_string("model.activation"));
  bo.bias = cfg.get_bool("model.bias");
  bo.last = parse_norm_kind(cfg.get_string("model.last"));
  const Domain domain = parse_domain(cfg.get_string("model.domain"));
  ts.layers = checked([&] { return build_config(domain, dims, bo); });

  const std::string base = stem(cfg);
  TrainResult res;
  try {
    res = train(ts, data);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }

  CsvWriter csv(base + ".csv",
                {"k", "gamma", "alpha", "loss", "grad_dual", "fw_gap", "param_norm", "est_error", "feasible"});
  for (const auto& r : res.diag.records) {
    csv.cell(r.k).cell(r.gamma).cell(r.alpha).cell(r.loss).cell(r.grad_dual).cell(r.fw_gap).cell(r.param_norm);
    csv.cell(r.est_error).cell(r.feasible).end_row();
  }
  csv.close();
  if (cfg.get_bool("train.checkpoint")) {
    save_checkpoint(base + ".ckpt", Checkpoint{res.model, res.diag.records.size(), seed});
  }
  auto j = summary_head(cfg);
  j["steps"] = res.diag.records.size();
  j["final_train_loss"] = json_number(res.final_train_loss);
  j["final_test_loss"] = json_number(res.final_test_loss);
  j["test_accuracy"] = json_number(res.test_accuracy);
  j["final_param_norm"] = json_number(res.final_param_norm);
  j["est_error_is_proxy"] = res.diag.est_error_is_proxy;
  bool feasible = true;
  for (const auto& r : res.diag.records) feasible = feasible && r.feasible;
  j["always_feasible"] = feasible;
  append_jsonl(base + ".jsonl", j);
  out << "train: " << res.diag.records.size() << " steps, final train loss "
      << format_double(res.final_train_loss);
  if (std::isfinite(res.test_accuracy)) out << ", test accuracy " << format_double(res.test_accuracy);
  out << "\nwrote " << base << ".csv\n";
  return kExitOk;
}

// ---- coord-check ------------------------------------------------------------------------------

int cmd_coord_check(const Config& cfg, std::ostream& out) {
  CoordCheckSpec s;
  s.widths = cfg.get_uint_list("widths");
  s.depth = cfg.get_uint("depth");
  s.gamma = cfg.get_double("gamma");
  s.samples = cfg.get_uint("samples");
  s.input_dim = cfg.get_uint("input_dim");
  s.output_dim = cfg.get_uint("output_dim");
  s.activation = parse_activation(cfg.get_string("activation"));
  s.lmo = lmo_options(cfg);
  s.seed = cfg.get_uint("seed");
  checked([&] {
    s.validate();
    return 0;
  });
  const double max_ratio = cfg.get_double("max_ratio");
  const double band = cfg.get_double("band");

  const auto rows = coordinate_check(s);
  const std::string base = stem(cfg);
  CsvWriter csv(base + ".csv", {"width", "layer", "rms", "rms_over_gamma"});
  bool in_band = true;
  for (const auto& r : rows) {
    const double rel = s.gamma > 0 ? r.rms / s.gamma : 0.0;
    csv.cell(r.width).cell(r.layer).cell(r.rms).cell(rel).end_row();
    out << "width " << r.width << " layer " << r.layer << " rms " << format_double(r.rms) << "\n";
    in_band = in_band && r.rms >= s.gamma / band && r.rms <= s.gamma * band;
  }
  csv.close();
  const double ratio = coord_width_ratio(rows);
  auto j = summary_head(cfg);
  j["max_width_ratio"] = json_number(ratio);
  j["in_band"] = in_band;
  j["pass"] = ratio <= max_ratio && in_band;
  append_jsonl(base + ".jsonl", j);
  out << "max width ratio " << format_double(ratio) << (ratio <= max_ratio ? " (ok)" : " (too large)")
      << "; band " << (in_band ? "ok" : "violated") << "\n";
  return kExitOk;
}

// ---- sweep ---------------------------------------------------------------------------------------

int cmd_sweep(const Config& cfg, std::ostream& out) {
  SweepSpec s;
  s.widths = cfg.get_uint_list("widths");
  s.gamma_min = cfg.get_double("gamma_min");
  s.grid_points = cfg.get_uint("grid_points");
  s.depth = cfg.get_uint("depth");
  s.family = parse_family(cfg.get_string("family"));
  s.activation = parse_activation(cfg.get_string("activation"));
  s.algo = parse_algo(cfg.get_string("algo"));
  s.alpha = cfg.get_double("alpha");
  s.epochs = cfg.get_uint("epochs");
  s.batch = cfg.get_uint("batch");
  s.loss = parse_loss(cfg.get_string("loss"));
  s.data = synthetic_from(cfg);
  s.lmo = lmo_options(cfg);
  s.seed = cfg.get_uint("seed");
  checked([&] {
    s.validate();
    return 0;
  });

  const auto res = lr_transfer_sweep(s);
  const std::string base = stem(cfg);
  CsvWriter csv(base + ".csv", {"width", "gamma", "final_loss"});
  for (const auto& r : res.rows) csv.cell(r.width).cell(r.gamma).cell(r.final_loss).end_row();
  csv.close();
  auto j = summary_head(cfg);
  nlohmann::json best = nlohmann::json::array();
  for (std::size_t i = 0; i < s.widths.size(); ++i) {
    best.push_back({{"width", s.widths[i]}, {"gamma", res.best_gamma[i]}, {"grid_index", res.best_index[i]}});
    out << "width " << s.widths[i] << ": best gamma " << format_double(res.best_gamma[i]) << "\n";
  }
  j["best"] = best;
  j["spread_grid_steps"] = res.spread;
  j["transfer"] = res.spread <= 1;
  append_jsonl(base + ".jsonl", j);
  out << "argmin spread " << res.spread << " grid step(s)\n";
  return kExitOk;
}

// ---- rate -------------------------------------------------------------------------------------------

namespace {

/// l2 radius of the constraint ball on a d x d operand: max ||X||_F over ||X|| <= rho.
double l2_radius(const StochasticQuadratic& q) {
  const double d = static_cast<double>(q.dim);
  switch (q.norm) {
    case NormKind::Spectral: return q.rho * std::sqrt(d);
    case NormKind::RowNorm: return q.rho;
    default: return q.rho * d;  // sign, colnorm
  }
}

}  // namespace

int cmd_rate(const Config& cfg, std::ostream& out) {
  RateSpec s;
  s.algo = parse_algo(cfg.get_string("algo"));
  s.mode = parse_rate_mode(cfg.get_string("mode"));
  s.alpha = cfg.get_double("alpha");
  s.n_list = cfg.get_uint_list("n_list");
  s.trials = cfg.get_uint("trials");
  s.problem = quadratic_from(cfg);
  s.lmo = lmo_options(cfg);
  s.seed = cfg.get_uint("seed");
  ProbeSpec p;
  p.n = cfg.get_uint("probe.n");
  p.trials = cfg.get_uint("probe.trials");
  p.problem = s.problem;
  p.lmo = s.lmo;
  p.seed = derive_seed(s.seed, 99);
  const bool probe = cfg.get_bool("probe.enabled");
  checked([&] {
    s.validate();
    if (probe) p.validate();
    return 0;
  });

  const auto res = rate_harness(s);
  const std::string base = stem(cfg);
  CsvWriter csv(base + ".csv", {"n", "gamma", "measure", "initial", "final"});
  for (const auto& pt : res.points) {
    csv.cell(pt.n).cell(pt.gamma).cell(pt.measure).cell(pt.initial).cell(pt.final_measure).end_row();
    out << "n " << pt.n << " gamma " << format_double(pt.gamma) << " mean measure " << format_double(pt.measure)
        << "\n";
  }
  csv.close();
  auto j = summary_head(cfg);
  const double r2 = l2_radius(s.problem);
  // Theory constants of the bounds; logged, not enforced.
  j["constants"] = {{"L", s.problem.lipschitz()},
                    {"sigma", s.problem.sigma},
                    {"rho", s.problem.rho},
                    {"rho2", r2},
                    {"D2", 2 * r2},
                    {"zeta", r2}};
  j["measure"] = s.algo == Algo::USCG ? "dual_grad_norm" : "fw_gap";
  if (s.mode == RateMode::VanishingAlpha) {
    j["slope"] = json_number(res.slope);
    out << "fitted slope " << format_double(res.slope) << "\n";
  } else {
    j["plateau"] = json_number(res.plateau);
    j["plateau_2sigma"] = json_number(res.plateau_2sigma);
    j["plateau_ratio"] = json_number(res.plateau_ratio);
    out << "plateau " << format_double(res.plateau) << ", at 2 sigma " << format_double(res.plateau_2sigma)
        << ", ratio " << format_double(res.plateau_ratio) << "\n";
  }
  if (probe) {
    const auto pr = error_decay_probe(p);
    CsvWriter pc(base + "_probe.csv", {"k", "mean_sq_error"});
    for (std::size_t k = 0; k < pr.mean_sq_error.size(); ++k) pc.cell(k + 1).cell(pr.mean_sq_error[k]).end_row();
    pc.close();
    j["probe_slope"] = json_number(pr.slope);
    out << "estimator-error slope " << format_double(pr.slope) << "\n";
  }
  append_jsonl(base + ".jsonl", j);
  return kExitOk;
}

// ---- dispatch -------------------------------------------------------------------------------------

namespace {

std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open config file '" + path + "'");
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"scion: norm-constrained optimizers, LMO checks and desk-scale experiments", "scion"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  std::vector<std::string> sets;
  auto* seed_opt = app.add_option("--seed", seed, "base seed (overrides the config)");
  app.add_option("--config", config_path, "JSON config file");
  auto* out_opt = app.add_option("--out", out_dir, "output directory (overrides the config)");
  app.add_option("--set", sets, "override a config key, key=value (repeatable)")->take_all();

  const std::vector<std::pair<std::string, std::string>> about{
      {"lmo-check", "check lmo boundary, dual-pairing and scale-invariance contracts"},
      {"train", "train an MLP and log per-step diagnostics"},
      {"coord-check", "per-layer pre-activation change after one step, across widths"},
      {"sweep", "learning-rate sweep across widths"},
      {"rate", "convergence-rate harness on a stochastic quadratic"},
  };
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, desc] : about) {
    auto* sub = app.add_subcommand(name, desc);
    sub->footer(help_text(schema_for(name)));
    sub->fallthrough();
    subs[name] = sub;
  }

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  std::string command;
  for (const auto& [name, sub] : subs) {
    if (sub->parsed()) command = name;
  }
  try {
    const Schema& schema = schema_for(command);
    const std::string text = config_path.empty() ? std::string() : read_text(config_path);
    if (*seed_opt) sets.push_back("seed=" + std::to_string(seed));
    if (*out_opt) sets.push_back("out=" + out_dir);
    const Config cfg = resolve_config(schema, text, sets);
    if (command == "lmo-check") return cmd_lmo_check(cfg, out);
    if (command == "train") return cmd_train(cfg, out);
    if (command == "coord-check") return cmd_coord_check(cfg, out);
    if (command == "sweep") return cmd_sweep(cfg, out);
    return cmd_rate(cfg, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}

}  // namespace scion::cli
