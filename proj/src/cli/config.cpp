// SPDX-License-Identifier: Apache-2.0
#include "scion/cli/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "scion/io/format.hpp"

namespace scion::cli {

namespace {

using Keys = std::vector<KeyDef>;

const std::vector<std::string> kKinds{"sign", "colnorm", "rownorm", "spectral", "euclidean", "max", "rms"};
const std::vector<std::string> kActs{"relu", "scaled-relu2", "scaled-gelu", "tanh", "identity"};
const std::vector<std::string> kAlgos{"uscg", "scg", "uscg-wd", "almond", "muon",
                                      "muon-nesterov", "ssd", "scion-light", "sgd"};
const std::vector<std::string> kFamilies{"recommended", "spectral", "colnorm", "rownorm", "sign"};
const std::vector<std::string> kLosses{"logistic", "mse"};

KeyDef key(std::string path, KeyType t, json def, std::string help, std::vector<std::string> choices = {}) {
  return KeyDef{std::move(path), t, std::move(def), std::move(help), std::move(choices)};
}

KeyDef num(std::string path, KeyType t, json def, std::string help, double min, bool exclusive = false) {
  KeyDef k = key(std::move(path), t, std::move(def), std::move(help));
  k.min = min;
  k.exclusive_min = exclusive;
  return k;
}

void add(Keys& to, const Keys& from) { to.insert(to.end(), from.begin(), from.end()); }

Keys common_keys() {
  return {
      key("seed", KeyType::UInt, 0, "base seed; every random stream is derived from it"),
      key("out", KeyType::String, ".", "output directory"),
      key("spectral.method", KeyType::String, "exact", "spectral lmo backend", {"exact", "newton-schulz"}),
      num("spectral.ns_iters", KeyType::UInt, 5, "Newton-Schulz iterations", 0),
  };
}

Keys synthetic_keys() {
  return {
      num("problem.dim", KeyType::UInt, 32, "input dimension", 1),
      num("problem.classes", KeyType::UInt, 4, "number of classes", 2),
      num("problem.clusters", KeyType::UInt, 4, "Gaussian clusters per class", 1),
      num("problem.noise", KeyType::Double, 1.5, "within-cluster noise level", 0),
      num("problem.n_train", KeyType::UInt, 1024, "training samples", 1),
      num("problem.n_test", KeyType::UInt, 256, "test samples", 0),
  };
}

Keys quadratic_keys() {
  return {
      num("problem.dim", KeyType::UInt, 8, "quadratic is over dim x dim matrices", 1),
      num("problem.sigma", KeyType::Double, 1.0, "injected gradient noise, E||xi||^2 = sigma^2", 0),
      num("problem.conditioning", KeyType::Double, 4.0, "curvature spread, eigenvalues in [1, c]", 1),
      key("problem.norm", KeyType::String, "spectral", "matrix norm of the constraint",
          {"sign", "colnorm", "rownorm", "spectral"}),
      num("problem.rho", KeyType::Double, 1.0, "radius", 0, true),
  };
}

Schema lmo_check_schema() {
  Schema s{"lmo-check", common_keys()};
  add(s.keys, {
                  key("kinds", KeyType::StringList, kKinds, "norm kinds to check", kKinds),
                  num("samples", KeyType::UInt, 100, "random inputs per kind", 1),
                  num("max_dim", KeyType::UInt, 64, "largest operand side", 1),
                  key("scales", KeyType::DoubleList, json::array({0.5, 2.0, 10.0}),
                      "positive scalings for the scale-invariance check"),
                  num("tol.boundary", KeyType::Double, 1e-10, "boundary tolerance, closed-form kinds", 0),
                  num("tol.boundary_spectral", KeyType::Double, 1e-8, "boundary tolerance, spectral", 0),
                  num("tol.dual", KeyType::Double, 1e-8, "dual-pairing tolerance (relative)", 0),
                  num("tol.scale", KeyType::Double, 1e-10, "scale-invariance tolerance", 0),
              });
  for (auto& k : s.keys) {
    if (k.path == "scales") {
      k.min = 0;
      k.exclusive_min = true;
    }
  }
  return s;
}

Keys model_keys() {
  return {
      key("model.domain", KeyType::String, "image", "input domain preset", {"image", "onehot", "weight-shared"}),
      key("model.family", KeyType::String, "recommended", "norm family", kFamilies),
      key("model.widths", KeyType::UIntList, json::array({64, 64}), "hidden widths"),
      key("model.activation", KeyType::String, "relu", "hidden activation", kActs),
      key("model.bias", KeyType::Bool, false, "hidden layers carry a bias"),
      key("model.last", KeyType::String, "sign", "last-layer norm (recommended family)",
          {"sign", "spectral", "rownorm"}),
  };
}

Keys optimizer_keys() {
  return {
      key("optimizer.algo", KeyType::String, "uscg", "update rule", kAlgos),
      num("optimizer.steps", KeyType::UInt, 200, "number of steps n", 1),
      num("optimizer.gamma", KeyType::Double, 0.1, "initial step size", 0),
      key("optimizer.gamma_schedule", KeyType::String, "constant", "step-size schedule",
          {"constant", "linear", "constant-then-linear"}),
      num("optimizer.warmdown", KeyType::UInt, 0, "decay length for constant-then-linear", 0),
      num("optimizer.alpha", KeyType::Double, 0.1, "averaging parameter", 0, true),
      key("optimizer.alpha_schedule", KeyType::String, "constant", "alpha schedule", {"constant", "vanishing"}),
      num("optimizer.wd_mu", KeyType::Double, 0.0, "weight decay for uscg-wd", 0),
      num("optimizer.beta", KeyType::Double, 0.9, "momentum for muon", 0),
      key("optimizer.first_alpha_one", KeyType::Bool, true, "use alpha = 1 on the first step"),
  };
}

Schema train_schema() {
  Schema s{"train", common_keys()};
  add(s.keys, model_keys());
  add(s.keys, optimizer_keys());
  add(s.keys, {key("problem.kind", KeyType::String, "synthetic", "data source", {"synthetic", "idx"})});
  add(s.keys, synthetic_keys());
  add(s.keys, {
                  key("problem.idx.train_images", KeyType::String, "", "IDX image file"),
                  key("problem.idx.train_labels", KeyType::String, "", "IDX label file"),
                  key("problem.idx.test_images", KeyType::String, "", "IDX image file (optional)"),
                  key("problem.idx.test_labels", KeyType::String, "", "IDX label file (optional)"),
                  num("train.batch", KeyType::UInt, 32, "minibatch size", 1),
                  key("train.loss", KeyType::String, "logistic", "loss", kLosses),
                  num("train.proxy_factor", KeyType::UInt, 16, "large-batch multiple for the gradient proxy", 1),
                  key("train.checkpoint", KeyType::Bool, true, "write the final model checkpoint"),
              });
  return s;
}

Schema coord_schema() {
  Schema s{"coord-check", common_keys()};
  add(s.keys, {
                  key("widths", KeyType::UIntList, json::array({64, 256, 1024}), "hidden widths"),
                  num("depth", KeyType::UInt, 3, "number of layers", 2),
                  num("gamma", KeyType::Double, 0.01, "step size", 0),
                  num("samples", KeyType::UInt, 32, "seeds averaged per width", 1),
                  num("input_dim", KeyType::UInt, 32, "input dimension", 1),
                  num("output_dim", KeyType::UInt, 10, "output dimension", 1),
                  key("activation", KeyType::String, "tanh", "hidden activation", kActs),
                  num("max_ratio", KeyType::Double, 2.0, "allowed max/min RMS ratio across widths", 1),
                  num("band", KeyType::Double, 3.0, "each RMS must lie in [gamma/band, gamma*band]", 1),
              });
  return s;
}

Schema sweep_schema() {
  Schema s{"sweep", common_keys()};
  add(s.keys, {
                  key("widths", KeyType::UIntList, json::array({128, 512}), "hidden widths"),
                  num("gamma_min", KeyType::Double, 1.0 / 8, "smallest step size; grid doubles", 0, true),
                  num("grid_points", KeyType::UInt, 8, "number of grid points", 1),
                  num("depth", KeyType::UInt, 3, "number of layers", 1),
                  key("family", KeyType::String, "sign", "norm family", kFamilies),
                  key("activation", KeyType::String, "relu", "hidden activation", kActs),
                  key("algo", KeyType::String, "uscg", "update rule", kAlgos),
                  num("alpha", KeyType::Double, 0.1, "averaging parameter", 0, true),
                  num("epochs", KeyType::UInt, 2, "passes over the training set", 1),
                  num("batch", KeyType::UInt, 32, "minibatch size", 1),
                  key("loss", KeyType::String, "logistic", "loss", kLosses),
              });
  add(s.keys, synthetic_keys());
  return s;
}

Schema rate_schema() {
  Schema s{"rate", common_keys()};
  add(s.keys, {
                  key("algo", KeyType::String, "uscg", "uscg or scg", {"uscg", "scg"}),
                  key("mode", KeyType::String, "vanishing", "alpha regime", {"vanishing", "constant"}),
                  num("alpha", KeyType::Double, 0.1, "alpha for the constant mode", 0, true),
                  key("n_list", KeyType::UIntList, json::array({100, 400, 1600, 6400}), "horizons n"),
                  num("trials", KeyType::UInt, 10, "trials per horizon", 1),
                  key("probe.enabled", KeyType::Bool, false, "also run the estimator-error probe"),
                  num("probe.n", KeyType::UInt, 4096, "probe horizon", 2),
                  num("probe.trials", KeyType::UInt, 20, "probe trials", 1),
              });
  add(s.keys, quadratic_keys());
  return s;
}

std::string path_str(std::string_view p) { return std::string(p); }

[[noreturn]] void bad_value(const KeyDef& k, const std::string& why) {
  throw ConfigError("config key '" + k.path + "': " + why);
}

void check_number(const KeyDef& k, double v) {
  if (!std::isfinite(v)) bad_value(k, "must be finite");
  if (k.exclusive_min ? !(v > k.min) : !(v >= k.min)) {
    bad_value(k, std::string("must be ") + (k.exclusive_min ? "> " : ">= ") + format_double(k.min));
  }
}

void check_choice(const KeyDef& k, const std::string& v) {
  if (k.choices.empty() || std::find(k.choices.begin(), k.choices.end(), v) != k.choices.end()) return;
  std::string all;
  for (const auto& c : k.choices) all += (all.empty() ? "" : "|") + c;
  bad_value(k, "'" + v + "' is not one of " + all);
}

void check_value(const KeyDef& k, const json& v) {
  switch (k.type) {
    case KeyType::Int:
      if (!v.is_number_integer()) bad_value(k, "expected an integer");
      check_number(k, v.get<double>());
      break;
    case KeyType::UInt:
      if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
        bad_value(k, "expected a nonnegative integer");
      }
      check_number(k, v.get<double>());
      break;
    case KeyType::Double:
      if (!v.is_number()) bad_value(k, "expected a number");
      check_number(k, v.get<double>());
      break;
    case KeyType::Bool:
      if (!v.is_boolean()) bad_value(k, "expected true or false");
      break;
    case KeyType::String:
      if (!v.is_string()) bad_value(k, "expected a string");
      check_choice(k, v.get<std::string>());
      break;
    case KeyType::UIntList:
    case KeyType::DoubleList:
    case KeyType::StringList:
      if (!v.is_array()) bad_value(k, "expected a list");
      for (const auto& e : v) {
        if (k.type == KeyType::StringList) {
          if (!e.is_string()) bad_value(k, "expected a list of strings");
          check_choice(k, e.get<std::string>());
        } else if (k.type == KeyType::UIntList) {
          if (!e.is_number_unsigned() && !(e.is_number_integer() && e.get<long long>() >= 0)) {
            bad_value(k, "expected a list of nonnegative integers");
          }
          if (e.get<double>() < 1) bad_value(k, "entries must be >= 1");
        } else {
          if (!e.is_number()) bad_value(k, "expected a list of numbers");
          check_number(k, e.get<double>());
        }
      }
      break;
  }
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  if (s.empty()) return out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, ',')) out.push_back(cur);
  if (s.back() == ',') out.emplace_back();
  return out;
}

json parse_override_value(const KeyDef& k, const std::string& text) {
  try {
    switch (k.type) {
      case KeyType::Int:
      case KeyType::UInt: {
        const long long v = parse_int(text, k.path);
        if (k.type == KeyType::UInt && v < 0) bad_value(k, "expected a nonnegative integer");
        return k.type == KeyType::UInt ? json(static_cast<unsigned long long>(v)) : json(v);
      }
      case KeyType::Double:
        return parse_double(text, k.path);
      case KeyType::Bool:
        if (text == "true") return true;
        if (text == "false") return false;
        bad_value(k, "expected true or false, got '" + text + "'");
      case KeyType::String:
        return text;
      case KeyType::UIntList: {
        json a = json::array();
        for (const auto& t : split_commas(text)) {
          const long long v = parse_int(t, k.path);
          if (v < 0) bad_value(k, "expected nonnegative integers");
          a.push_back(static_cast<unsigned long long>(v));
        }
        return a;
      }
      case KeyType::DoubleList: {
        json a = json::array();
        for (const auto& t : split_commas(text)) a.push_back(parse_double(t, k.path));
        return a;
      }
      case KeyType::StringList: {
        json a = json::array();
        for (const auto& t : split_commas(text)) a.push_back(t);
        return a;
      }
    }
  } catch (const std::invalid_argument& e) {
    bad_value(k, e.what());
  }
  return {};
}

}  // namespace

const KeyDef* Schema::find(std::string_view path) const {
  for (const auto& k : keys) {
    if (k.path == path) return &k;
  }
  return nullptr;
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"lmo-check", "train", "coord-check", "sweep", "rate"};
  return names;
}

const Schema& schema_for(std::string_view command) {
  static const std::map<std::string, Schema, std::less<>> all{
      {"lmo-check", lmo_check_schema()}, {"train", train_schema()},  {"coord-check", coord_schema()},
      {"sweep", sweep_schema()},         {"rate", rate_schema()},
  };
  const auto it = all.find(command);
  if (it == all.end()) throw ConfigError("unknown command '" + path_str(command) + "'");
  return it->second;
}

std::string_view key_type_name(KeyType t) {
  switch (t) {
    case KeyType::Int: return "int";
    case KeyType::UInt: return "uint";
    case KeyType::Double: return "float";
    case KeyType::Bool: return "bool";
    case KeyType::String: return "string";
    case KeyType::UIntList: return "uint-list";
    case KeyType::DoubleList: return "float-list";
    case KeyType::StringList: return "string-list";
  }
  return "?";
}

namespace {

std::string show_default(const json& v) {
  if (v.is_number_float()) return format_double(v.get<double>());
  if (v.is_string()) return v.get<std::string>().empty() ? "\"\"" : v.get<std::string>();
  if (v.is_array()) {
    std::string s;
    for (const auto& e : v) {
      s += s.empty() ? "" : ",";
      s += e.is_number_float() ? format_double(e.get<double>()) : (e.is_string() ? e.get<std::string>() : e.dump());
    }
    return s.empty() ? "\"\"" : s;
  }
  return v.dump();
}

}  // namespace

std::string help_text(const Schema& schema) {
  std::size_t w = 0;
  for (const auto& k : schema.keys) w = std::max(w, k.path.size());
  std::ostringstream out;
  out << "Global flags: --config <path> --seed <int> --out <dir> --set key=value (repeatable)\n\n";
  out << "Config keys (set in --config JSON or with --set key=value):\n";
  for (const auto& k : schema.keys) {
    const std::string_view t = key_type_name(k.type);
    out << "  " << k.path << std::string(w + 2 - k.path.size(), ' ') << t << std::string(13 - t.size(), ' ')
        << k.help << " [default " << show_default(k.def) << "]";
    if (!k.choices.empty()) {
      out << " {";
      for (std::size_t i = 0; i < k.choices.size(); ++i) out << (i ? "|" : "") << k.choices[i];
      out << "}";
    }
    out << "\n";
  }
  return out.str();
}

void flatten(const json& tree, const std::string& prefix, json& out) {
  for (auto it = tree.begin(); it != tree.end(); ++it) {
    const std::string p = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (it->is_object()) {
      flatten(*it, p, out);
    } else {
      out[p] = *it;
    }
  }
}

Config resolve_config(const Schema& schema, const std::string& file_text,
                      const std::vector<std::string>& overrides) {
  json flat = json::object();
  for (const auto& k : schema.keys) flat[k.path] = k.def;

  bool blank = std::all_of(file_text.begin(), file_text.end(), [](unsigned char c) { return std::isspace(c); });
  if (!blank) {
    json tree;
    try {
      tree = json::parse(file_text);
    } catch (const json::parse_error& e) {
      throw ConfigError(std::string("config file is not valid JSON: ") + e.what());
    }
    if (!tree.is_object()) throw ConfigError("config file must hold a JSON object");
    json given = json::object();
    flatten(tree, "", given);
    for (auto it = given.begin(); it != given.end(); ++it) {
      const KeyDef* k = schema.find(it.key());
      if (!k) throw ConfigError("unknown config key '" + it.key() + "' for command " + schema.command);
      // Integral JSON numbers are accepted for float keys.
      flat[it.key()] = *it;
    }
  }
  for (const auto& ov : overrides) {
    const auto eq = ov.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects key=value, got '" + ov + "'");
    const std::string path = ov.substr(0, eq);
    const KeyDef* k = schema.find(path);
    if (!k) throw ConfigError("unknown config key '" + path + "' for command " + schema.command);
    flat[path] = parse_override_value(*k, ov.substr(eq + 1));
  }
  for (const auto& k : schema.keys) {
    check_value(k, flat[k.path]);
    if (k.type == KeyType::Double && flat[k.path].is_number_integer()) {
      flat[k.path] = flat[k.path].get<double>();
    }
  }
  return Config(schema, std::move(flat));
}

const json& Config::at(std::string_view path, KeyType t) const {
  const KeyDef* k = schema_->find(path);
  if (!k || k->type != t) {
    throw std::logic_error("config key '" + std::string(path) + "' read with the wrong type");
  }
  return values_.at(std::string(path));
}

long long Config::get_int(std::string_view p) const { return at(p, KeyType::Int).get<long long>(); }
std::size_t Config::get_uint(std::string_view p) const { return at(p, KeyType::UInt).get<std::size_t>(); }
double Config::get_double(std::string_view p) const { return at(p, KeyType::Double).get<double>(); }
bool Config::get_bool(std::string_view p) const { return at(p, KeyType::Bool).get<bool>(); }
std::string Config::get_string(std::string_view p) const { return at(p, KeyType::String).get<std::string>(); }
std::vector<std::size_t> Config::get_uint_list(std::string_view p) const {
  return at(p, KeyType::UIntList).get<std::vector<std::size_t>>();
}
std::vector<double> Config::get_double_list(std::string_view p) const {
  return at(p, KeyType::DoubleList).get<std::vector<double>>();
}
std::vector<std::string> Config::get_string_list(std::string_view p) const {
  return at(p, KeyType::StringList).get<std::vector<std::string>>();
}

json Config::tree() const {
  json t = json::object();
  for (auto it = values_.begin(); it != values_.end(); ++it) {
    t[json::json_pointer("/" + [&] {
      std::string s = it.key();
      std::replace(s.begin(), s.end(), '.', '/');
      return s;
    }())] = *it;
  }
  return t;
}

std::string Config::hash() const {
  json t = values_;
  t.erase("seed");
  t.erase("out");
  const std::string text = t.dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace scion::cli
