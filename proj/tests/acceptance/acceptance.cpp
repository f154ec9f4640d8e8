// SPDX-License-Identifier: Apache-2.0
//
// Acceptance run: one PASS/FAIL line per criterion.
//
//   acceptance [--only 1,2,...] [--expect-fail 6,...]
//
// Exit status is 0 when the set of failing criteria equals the --expect-fail
// set (empty by default), so a criterion listed there that starts passing is
// also reported as a mismatch.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "scion/cli/commands.hpp"
#include "scion/experiments/harness.hpp"
#include "scion/experiments/lmo_suite.hpp"
#include "scion/linalg/newton_schulz.hpp"
#include "scion/linalg/qr.hpp"
#include "scion/linalg/rng.hpp"
#include "scion/linalg/svd.hpp"
#include "scion/models/presets.hpp"
#include "scion/optim/optimizer.hpp"

using namespace scion;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

ParamList random_params(const ModelNormSpec& spec, Rng& rng) {
  ParamList p;
  for (const auto& pn : spec.params()) p.push_back(gaussian_matrix(pn.spec.d_out, pn.spec.d_in, rng));
  return p;
}

double max_diff(const ParamList& a, const ParamList& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, max_abs(a[i] - b[i]));
  return m;
}

// Every matrix kind plus a bias, with distinct layer scalings.
ModelNormSpec mixed_spec() {
  ModelNormSpec s;
  s.layers.push_back({NormSpec::matrix(NormKind::Spectral, 8, 5), std::nullopt, 1.3, std::nullopt});
  s.layers.push_back({NormSpec::matrix(NormKind::ColNorm, 6, 8), NormSpec::vector(NormKind::RmsVec, 6), 0.7, std::nullopt});
  s.layers.push_back({NormSpec::matrix(NormKind::RowNorm, 4, 6), std::nullopt, 0.9, std::nullopt});
  s.layers.push_back({NormSpec::matrix(NormKind::Sign, 3, 4), std::nullopt, 0.25, std::nullopt});
  return s;
}

// Models built from the presets, one per domain.
std::vector<MlpModel> preset_models(std::uint64_t seed) {
  std::vector<MlpModel> out;
  BuildOptions bias_opts;
  bias_opts.bias = true;
  out.push_back(init_model(build_config(Domain::Image, {32, 64, 64, 10}), seed));
  out.push_back(init_model(build_config(Domain::OneHot, {16, 48, 48, 16}, bias_opts), seed + 1));
  out.push_back(init_model(build_config(Domain::WeightShared, {24, 40, 8}), seed + 2));
  return out;
}

// ---- criteria ---------------------------------------------------------------------------

Outcome c1_lmo_suite() {
  const auto t0 = std::chrono::steady_clock::now();
  LmoSuiteSpec spec;
  spec.seed = 1;
  const auto rows = run_lmo_suite(spec);
  const double secs = seconds_since(t0);
  double b = 0, d = 0, s = 0;
  bool pass = secs < 10.0;
  for (const auto& r : rows) {
    b = std::max(b, r.boundary);
    d = std::max(d, r.dual);
    s = std::max(s, r.scale);
    pass = pass && r.pass && r.samples == 100;
  }
  return {pass && rows.size() == 7,
          fmt("7 kinds x 100 samples, dims <= 64: boundary %.1e, dual %.1e, scale %.1e, %.2f s", b, d, s, secs)};
}

Outcome c2_brute_force() {
  Rng rng(2);
  std::size_t cases = 0, mismatches = 0;
  for (NormKind kind : {NormKind::Sign, NormKind::MaxVec}) {
    for (int t = 0; t < 500; ++t) {
      const double rho = 0.5 + 1.5 * rng.uniform();
      const NormSpec ns = kind == NormKind::Sign ? NormSpec::matrix(kind, 2, 2, rho) : NormSpec::vector(kind, 4, rho);
      const std::size_t rows = kind == NormKind::Sign ? 2 : 4;
      const std::size_t cols = kind == NormKind::Sign ? 2 : 1;
      Matrix s(rows, cols);
      // Small integers hit ties and zeros; Gaussians cover the generic case.
      for (std::size_t i = 0; i < s.size(); ++i) {
        s[i] = t % 2 == 0 ? static_cast<double>(static_cast<int>(rng.below(7)) - 3) : rng.gaussian();
      }
      double best = INFINITY;
      for (unsigned mask = 0; mask < 16; ++mask) {
        Matrix x(rows, cols);
        for (std::size_t i = 0; i < 4; ++i) x[i] = (mask >> i & 1u) ? rho : -rho;
        best = std::min(best, inner(s, x));
      }
      const Matrix l = lmo(s, ns);
      ++cases;
      if (inner(s, l) != best || op_norm(l, ns) > rho) ++mismatches;
    }
  }
  return {mismatches == 0, fmt("%zu instances over 16 extreme points each, %zu mismatches", cases, mismatches)};
}

Outcome c3_scg_feasibility() {
  double worst = 0.0;
  std::size_t runs = 0;
  Rng rng(3);
  std::vector<ModelNormSpec> specs{mixed_spec()};
  std::vector<ParamList> starts{composite_lmo(random_params(specs[0], rng), specs[0])};
  for (const auto& m : preset_models(30)) {
    specs.push_back(m.norm_spec());
    starts.push_back(m.params());
  }
  for (std::size_t r = 0; r < specs.size(); ++r) {
    ParamList x = starts[r];
    auto st = make_state(Algo::SCG, x);
    worst = std::max(worst, composite_norm(x, specs[r]));
    for (int k = 1; k <= 500; ++k) {
      ParamList g = random_params(specs[r], rng);
      for (auto& m : g) m *= std::pow(10.0, -2.0 + 4.0 * rng.uniform());
      scg_step(x, st, g, rng.uniform(), 0.1, specs[r], {}, false);
      worst = std::max(worst, composite_norm(x, specs[r]));
    }
    ++runs;
  }
  return {worst <= 1.0 + 1e-8, fmt("%zu runs x 500 steps: max composite norm 1 + %.1e", runs, worst - 1.0)};
}

Outcome c4_uscg_growth() {
  double worst_slack = INFINITY;
  Rng rng(4);
  std::vector<ModelNormSpec> specs{mixed_spec()};
  for (const auto& m : preset_models(40)) specs.push_back(m.norm_spec());
  for (const auto& spec : specs) {
    const ParamList x1 = random_params(spec, rng);
    ParamList x = x1;
    auto st = make_state(Algo::USCG, x);
    double gamma_sum = 0.0;
    for (int k = 1; k <= 500; ++k) {
      const double gamma = 0.05 * rng.uniform();
      uscg_step(x, st, random_params(spec, rng), gamma, 0.1, spec);
      gamma_sum += gamma;
      ParamList diff = x;
      for (std::size_t i = 0; i < diff.size(); ++i) diff[i] -= x1[i];
      worst_slack = std::min(worst_slack, gamma_sum + 1e-8 - composite_norm(diff, spec));
    }
  }
  return {worst_slack >= 0.0, fmt("%zu runs x 500 steps: min (sum gamma + 1e-8 - ||x^n - x^1||) = %.3e",
                                  specs.size(), worst_slack)};
}

Outcome c5_equivalences() {
  const std::size_t steps = 150;
  double muon = 0, wd = 0, light = 0;
  std::vector<ModelNormSpec> specs{mixed_spec()};
  for (const auto& m : preset_models(50)) specs.push_back(m.norm_spec());
  for (std::size_t r = 0; r < specs.size(); ++r) {
    const auto& spec = specs[r];
    Rng rng(derive_seed(5, r));
    const ParamList x0 = composite_lmo(random_params(spec, rng), spec);
    const double beta = 0.9, gamma = 0.02, mu = 0.5;
    ModelNormSpec big = spec;
    for (auto& L : big.layers) {
      L.rho /= mu;
      if (L.bias_rho) *L.bias_rho /= mu;
    }
    ParamList a = x0, b = x0, c = x0, e = x0, f = x0, h = x0;
    ParamList gbuf = zeros_like(x0);
    auto sa = make_state(Algo::MUON_PLAIN, x0), sb = make_state(Algo::USCG, x0);
    auto sc = make_state(Algo::USCG_WD, x0), se = make_state(Algo::SCG, x0);
    auto sh = make_state(Algo::USCG, x0);
    sb.first_alpha_one = false;
    sh.first_alpha_one = false;
    for (std::size_t k = 0; k < steps; ++k) {
      // One gradient per step feeds every optimizer.
      const ParamList g = random_params(spec, rng);
      muon_step(a, sa, g, gamma, beta, false, spec);
      uscg_step(b, sb, g, gamma, 1.0 - beta, spec);
      uscg_wd_step(c, sc, g, gamma, 0.1, mu, spec);
      scg_step(e, se, g, gamma * mu, 0.1, big);
      accumulate_gradient(gbuf, g);
      scion_light_update(f, gbuf, gamma, 0.1, spec);
      uscg_step(h, sh, g, gamma, 0.1, spec);
      muon = std::max(muon, max_diff(a, b));
      wd = std::max(wd, max_diff(c, e));
      light = std::max(light, max_diff(f, h));
    }
  }
  const bool pass = muon <= 1e-10 && wd <= 1e-10 && light <= 1e-10;
  return {pass, fmt("%zu models x %zu steps: Muon/uSCG %.1e, uSCG-WD/SCG %.1e, ScionLight/uSCG %.1e",
                    specs.size(), steps, muon, wd, light)};
}

Matrix with_spectrum(std::size_t m, std::size_t n, const std::vector<double>& sigma, std::uint64_t seed) {
  Matrix us = semi_orthogonal_init(m, sigma.size(), seed);
  const Matrix v = semi_orthogonal_init(n, sigma.size(), seed + 1);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < sigma.size(); ++j) us(i, j) *= sigma[j];
  }
  return matmul_nt(us, v);
}

Outcome c6_newton_schulz() {
  const auto t0 = std::chrono::steady_clock::now();
  double sv_lo = INFINITY, sv_hi = 0.0, align_min = INFINITY, cos_min = INFINITY;
  std::uint64_t seed = 600;
  std::size_t cases = 0;
  std::vector<std::pair<std::size_t, std::size_t>> shapes{{2, 2}, {8, 8}, {16, 8}, {8, 32}, {32, 32}, {64, 48}};
  for (auto [m, n] : shapes) {
    for (double kappa : {1.0, 3.0, 10.0, 30.0, 100.0}) {
      const std::size_t r = std::min(m, n);
      std::vector<double> sigma(r);
      for (std::size_t i = 0; i < r; ++i) {
        sigma[i] = r == 1 ? 1.0 : std::pow(kappa, -static_cast<double>(i) / static_cast<double>(r - 1));
      }
      const Matrix a = with_spectrum(m, n, sigma, seed += 2);
      const Matrix out = newton_schulz_orthogonalize(a, kDefaultNewtonSchulzIters);
      const Matrix target = polar_factor(svd_reduced(a));
      const auto sv = svd_reduced(out);
      sv_lo = std::min(sv_lo, sv.sigma.back());
      sv_hi = std::max(sv_hi, sv.sigma.front());
      const double tt = frobenius_norm(target);
      align_min = std::min(align_min, inner(out, target) / (tt * tt));
      cos_min = std::min(cos_min, inner(out, target) / (frobenius_norm(out) * tt));
      ++cases;
    }
  }
  const double secs = seconds_since(t0);
  const bool pass = sv_lo >= 0.65 && sv_hi <= 1.35 && align_min >= 0.95 && secs < 5.0;
  return {pass, fmt("%zu inputs, kappa <= 100: singular values [%.3f, %.3f], alignment <M,UV'>/||UV'||^2 min %.3f "
                    "(cosine min %.3f), %.2f s",
                    cases, sv_lo, sv_hi, align_min, cos_min, secs)};
}

Outcome c7_backprop() {
  const std::vector<Activation> acts{Activation::ReLU, Activation::ScaledReLU2, Activation::ScaledGELU,
                                     Activation::Tanh, Activation::Identity};
  double worst = 0.0;
  std::size_t configs = 0;
  for (LossKind loss : {LossKind::MSE, LossKind::Logistic}) {
    for (Activation act : acts) {
      for (bool bias : {false, true}) {
        Rng rng(derive_seed(7, configs));
        BuildOptions opts;
        opts.hidden = act;
        opts.bias = bias;
        opts.last = NormKind::Spectral;
        MlpModel m = init_model(build_config(Domain::Image, {8, 8, 4, 3}, opts), rng.next_u64());
        for (auto& p : m.params()) {
          p = gaussian_matrix(p.rows(), p.cols(), rng) * (0.6 / std::sqrt(static_cast<double>(p.cols())));
        }
        Batch batch;
        batch.x = gaussian_matrix(3, 8, rng);
        batch.targets = gaussian_matrix(3, 3, rng);
        for (int i = 0; i < 3; ++i) batch.labels.push_back(rng.below(3));
        const auto lg = loss_and_grad(m, batch, loss);
        for (std::size_t p = 0; p < m.params().size(); ++p) {
          for (std::size_t i = 0; i < m.params()[p].size(); ++i) {
            double& x = m.params()[p][i];
            const double x0 = x;
            const double h = 1e-6 * std::max(1.0, std::abs(x0));
            x = x0 + h;
            const double up = loss_only(m, batch, loss);
            x = x0 - h;
            const double dn = loss_only(m, batch, loss);
            x = x0;
            const double fd = (up - dn) / (2 * h);
            const double an = lg.grad[p][i];
            worst = std::max(worst, std::abs(an - fd) / std::max({std::abs(an), std::abs(fd), 1e-3}));
          }
        }
        ++configs;
      }
    }
  }
  return {worst <= 1e-5, fmt("%zu configs (2 losses x 5 activations x bias on/off), 3 layers: max rel error %.2e",
                             configs, worst)};
}

Outcome c8_rate() {
  const auto t0 = std::chrono::steady_clock::now();
  std::string detail;
  bool pass = true;
  for (Algo algo : {Algo::USCG, Algo::SCG}) {
    RateSpec spec;
    spec.algo = algo;
    spec.seed = 8;
    spec.mode = RateMode::VanishingAlpha;
    const auto v = rate_harness(spec);
    bool in_interval = true;
    for (const auto& p : v.points) in_interval = in_interval && gamma_in_theorem_interval(p.gamma, p.n);
    spec.mode = RateMode::ConstantAlpha;
    const auto c = rate_harness(spec);
    const bool ok = in_interval && v.slope <= -0.15 && c.plateau_ratio >= 1.3 && c.plateau_ratio <= 3.0;
    pass = pass && ok;
    detail += fmt("%s slope %.3f, plateau ratio %.3f; ", algo == Algo::USCG ? "uSCG" : "SCG", v.slope,
                  c.plateau_ratio);
  }
  const double secs = seconds_since(t0);
  pass = pass && secs < 300.0;
  return {pass, detail + fmt("n in {100,400,1600,6400}, 10 trials, %.1f s", secs)};
}

Outcome c9_probe() {
  ProbeSpec spec;
  spec.seed = 9;
  const auto r = error_decay_probe(spec);
  return {r.slope <= -0.25, fmt("alpha_k = 1/sqrt(k), n = %zu, %zu trials: slope %.3f", spec.n, spec.trials, r.slope)};
}

Outcome c10_coord_check() {
  const auto t0 = std::chrono::steady_clock::now();
  CoordCheckSpec spec;
  spec.seed = 10;
  const auto rows = coordinate_check(spec);
  const double ratio = coord_width_ratio(rows);
  double lo = INFINITY, hi = 0.0;
  for (const auto& r : rows) {
    lo = std::min(lo, r.rms);
    hi = std::max(hi, r.rms);
  }
  const double secs = seconds_since(t0);
  const bool pass = ratio <= 2.0 && lo >= spec.gamma / 3 && hi <= 3 * spec.gamma && secs < 120.0;
  return {pass, fmt("widths {64,256,1024}, depth 3, gamma %.3g: width ratio %.3f, RMS in [%.4g, %.4g], %.1f s",
                    spec.gamma, ratio, lo, hi, secs)};
}

Outcome c11_sweep() {
  SweepSpec spec;
  spec.seed = 11;
  const auto r = lr_transfer_sweep(spec);
  std::string best;
  for (std::size_t i = 0; i < spec.widths.size(); ++i) {
    best += fmt("%s%zu -> %.4g", i ? ", " : "", spec.widths[i], r.best_gamma[i]);
  }
  return {r.spread <= 1, fmt("8-point 2x grid, argmin gamma %s, spread %zu grid steps", best.c_str(), r.spread)};
}

Outcome c12_determinism() {
  const fs::path root = fs::temp_directory_path() / ("scion_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  std::vector<std::pair<std::string, std::vector<std::string>>> cmds{
      {"lmo-check", {}},
      {"train", {}},
      {"coord-check", {"--set", "widths=64,128", "--set", "samples=4"}},
      {"sweep", {"--set", "widths=32,64", "--set", "problem.n_train=256"}},
      {"rate", {"--set", "n_list=100,400", "--set", "trials=3", "--set", "probe.enabled=true", "--set",
                "probe.n=256", "--set", "probe.trials=3"}},
  };
  std::size_t identical = 0;
  std::string failed;
  for (const auto& [cmd, extra] : cmds) {
    std::string bytes[2];
    for (int rep = 0; rep < 2; ++rep) {
      const fs::path dir = root / (cmd + std::to_string(rep));
      std::vector<std::string> args{cmd, "--seed", "12", "--out", dir.string()};
      args.insert(args.end(), extra.begin(), extra.end());
      std::ostringstream out, err;
      if (cli::run_cli(args, out, err) != cli::kExitOk) break;
      for (const auto& e : fs::directory_iterator(dir)) {
        if (e.path().extension() != ".csv") continue;
        std::ifstream f(e.path(), std::ios::binary);
        bytes[rep] += e.path().filename().string() + "\n";
        bytes[rep].append(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
      }
    }
    if (!bytes[0].empty() && bytes[0] == bytes[1]) {
      ++identical;
    } else {
      failed += " " + cmd;
    }
  }
  fs::remove_all(root);
  return {identical == cmds.size(), fmt("%zu/%zu commands byte-identical across two runs%s%s", identical,
                                        cmds.size(), failed.empty() ? "" : "; differing:", failed.c_str())};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"scion acceptance checks"};
  std::vector<int> only, expect_fail;
  app.add_option("--only", only, "criteria to run (default all)")->delimiter(',');
  app.add_option("--expect-fail", expect_fail, "criteria known to fail")->delimiter(',');
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"LMO contract suite", c1_lmo_suite},
      {"brute-force LMO optimality", c2_brute_force},
      {"SCG feasibility", c3_scg_feasibility},
      {"uSCG norm growth", c4_uscg_growth},
      {"optimizer equivalences", c5_equivalences},
      {"Newton-Schulz vs exact SVD", c6_newton_schulz},
      {"backprop vs finite differences", c7_backprop},
      {"rate checks", c8_rate},
      {"error-decay probe", c9_probe},
      {"coordinate check", c10_coord_check},
      {"LR transfer sweep", c11_sweep},
      {"determinism", c12_determinism},
  };

  std::set<int> failing;
  const std::set<int> expected(expect_fail.begin(), expect_fail.end());
  std::set<int> ran;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i + 1);
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    ran.insert(id);
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) failing.insert(id);
    std::printf("criterion %2d %-31s %s  %s\n", id, criteria[i].first, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
  }

  std::set<int> expected_ran;
  for (int id : expected) {
    if (ran.count(id)) expected_ran.insert(id);
  }
  std::printf("%zu/%zu passed", ran.size() - failing.size(), ran.size());
  if (!expected_ran.empty()) {
    std::printf("; expected failures:");
    for (int id : expected_ran) std::printf(" %d", id);
  }
  std::printf("\n");
  return failing == expected_ran ? 0 : 1;
}
