// SPDX-License-Identifier: Apache-2.0
#include "scion/models/mlp.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>

#include "scion/linalg/qr.hpp"
#include "scion/linalg/rng.hpp"

namespace scion {

namespace {

constexpr std::array<std::pair<Activation, std::string_view>, 5> kActivations{{
    {Activation::ReLU, "relu"},
    {Activation::ScaledReLU2, "scaled-relu2"},
    {Activation::ScaledGELU, "scaled-gelu"},
    {Activation::Tanh, "tanh"},
    {Activation::Identity, "identity"},
}};

constexpr std::array<std::pair<InitScheme, std::string_view>, 5> kInits{{
    {InitScheme::SemiOrthogonal, "semi-orthogonal"},
    {InitScheme::ColNormalizedGaussian, "col-normalized-gaussian"},
    {InitScheme::RowNormalizedGaussian, "row-normalized-gaussian"},
    {InitScheme::RandomSign, "random-sign"},
    {InitScheme::Kaiming, "kaiming"},
}};

constexpr std::array<std::pair<LossKind, std::string_view>, 2> kLosses{{
    {LossKind::MSE, "mse"},
    {LossKind::Logistic, "logistic"},
}};

template <class E, std::size_t N>
std::string_view name_of(const std::array<std::pair<E, std::string_view>, N>& table, E e) {
  for (const auto& [v, n] : table) {
    if (v == e) return n;
  }
  return "?";
}

template <class E, std::size_t N>
E parse_of(const std::array<std::pair<E, std::string_view>, N>& table, std::string_view name,
           const char* what) {
  std::string options;
  for (const auto& [v, n] : table) {
    if (n == name) return v;
    options += (options.empty() ? "" : "|") + std::string(n);
  }
  throw std::invalid_argument(std::string("unknown ") + what + " '" + std::string(name) +
                              "' (expected " + options + ")");
}

constexpr double kGeluC = 0.7978845608028654;  // sqrt(2/pi)
constexpr double kGeluA = 0.044715;

void normalize_columns(Matrix& m) {
  for (std::size_t j = 0; j < m.cols(); ++j) {
    auto c = m.column(j);
    double n = 0.0;
    for (double v : c) n += v * v;
    n = std::sqrt(n);
    for (double& v : c) v /= n;
    m.set_column(j, c);
  }
}

void normalize_rows(Matrix& m) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto r = m.row(i);
    double n = 0.0;
    for (double v : r) n += v * v;
    n = std::sqrt(n);
    for (double& v : r) v /= n;
  }
}

Matrix apply_activation(Activation a, const Matrix& f) {
  if (a == Activation::Identity) return f;
  Matrix h(f.rows(), f.cols());
  for (std::size_t i = 0; i < f.size(); ++i) h[i] = activate(a, f[i]);
  return h;
}

}  // namespace

std::string_view activation_name(Activation a) { return name_of(kActivations, a); }
Activation parse_activation(std::string_view name) {
  return parse_of(kActivations, name, "activation");
}
std::string_view init_name(InitScheme s) { return name_of(kInits, s); }
InitScheme parse_init(std::string_view name) { return parse_of(kInits, name, "init scheme"); }
std::string_view loss_name(LossKind k) { return name_of(kLosses, k); }
LossKind parse_loss(std::string_view name) { return parse_of(kLosses, name, "loss"); }

double activate(Activation a, double x) {
  switch (a) {
    case Activation::ReLU:
      return x > 0.0 ? x : 0.0;
    case Activation::ScaledReLU2:
      return x > 0.0 ? 2.0 * x * x : 0.0;
    case Activation::ScaledGELU: {
      const double u = kGeluC * (x + kGeluA * x * x * x);
      return std::numbers::sqrt2 * 0.5 * x * (1.0 + std::tanh(u));
    }
    case Activation::Tanh:
      return std::tanh(x);
    case Activation::Identity:
      return x;
  }
  return x;
}

double activate_derivative(Activation a, double x) {
  switch (a) {
    case Activation::ReLU:
      return x > 0.0 ? 1.0 : 0.0;
    case Activation::ScaledReLU2:
      return x > 0.0 ? 4.0 * x : 0.0;
    case Activation::ScaledGELU: {
      const double u = kGeluC * (x + kGeluA * x * x * x);
      const double t = std::tanh(u);
      const double du = kGeluC * (1.0 + 3.0 * kGeluA * x * x);
      return std::numbers::sqrt2 * 0.5 * ((1.0 + t) + x * (1.0 - t * t) * du);
    }
    case Activation::Tanh: {
      const double t = std::tanh(x);
      return 1.0 - t * t;
    }
    case Activation::Identity:
      return 1.0;
  }
  return 1.0;
}

double lmo_scale(const LayerSpec& spec) {
  const double dout = static_cast<double>(spec.d_out);
  const double din = static_cast<double>(spec.d_in);
  const double rho = spec.rho_scale;
  switch (spec.weight_norm.kind) {
    case NormKind::Spectral:
      return rho * std::sqrt(dout / din);
    case NormKind::ColNorm:
      return rho * std::sqrt(dout);
    case NormKind::RowNorm:
      return rho / std::sqrt(din);
    case NormKind::Sign:
    case NormKind::MaxVec:
    case NormKind::EuclideanVec:
      return rho;
    case NormKind::RmsVec:
      return rho * std::sqrt(dout * din);
  }
  return rho;
}

void validate_layers(const std::vector<LayerSpec>& layers) {
  if (layers.empty()) throw std::invalid_argument("model needs at least one layer");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& L = layers[l];
    const std::string where = "layer " + std::to_string(l);
    if (L.d_in == 0 || L.d_out == 0) throw std::invalid_argument(where + ": zero dimension");
    if (l > 0 && L.d_in != layers[l - 1].d_out) {
      throw std::invalid_argument(where + ": d_in " + std::to_string(L.d_in) +
                                  " does not match previous d_out " +
                                  std::to_string(layers[l - 1].d_out));
    }
    if (L.weight_norm.d_out != L.d_out || L.weight_norm.d_in != L.d_in) {
      throw std::invalid_argument(where + ": weight norm shape does not match layer");
    }
    if (L.bias_norm && (L.bias_norm->dim() != L.d_out)) {
      throw std::invalid_argument(where + ": bias norm shape does not match layer");
    }
    if (!(L.rho_scale > 0.0) || !(L.bias_rho > 0.0)) {
      throw std::invalid_argument(where + ": scalings must be positive");
    }
  }
  const auto& last = layers.back();
  if (last.activation != Activation::Identity) {
    throw std::invalid_argument("last layer must use the identity activation (logits)");
  }
  if (last.has_bias()) throw std::invalid_argument("last layer carries no bias");
}

ModelNormSpec model_norm_spec(const std::vector<LayerSpec>& layers) {
  ModelNormSpec spec;
  for (const auto& L : layers) {
    LayerNorm ln{L.weight_norm, L.bias_norm, L.rho_scale, std::nullopt};
    if (L.bias_norm) ln.bias_rho = L.bias_rho;
    spec.layers.push_back(ln);
  }
  return spec;
}

MlpModel::MlpModel(std::vector<LayerSpec> layers, ParamList params)
    : layers_(std::move(layers)), params_(std::move(params)) {
  validate_layers(layers_);
  std::size_t idx = 0;
  for (const auto& L : layers_) {
    weight_index_.push_back(idx);
    idx += L.has_bias() ? 2 : 1;
  }
  norm_spec().check_params(params_);
}

const Matrix* MlpModel::bias(std::size_t l) const {
  return layers_[l].has_bias() ? &params_[weight_index_[l] + 1] : nullptr;
}

MlpModel init_model(const std::vector<LayerSpec>& layers, std::uint64_t seed) {
  validate_layers(layers);
  ParamList params;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& L = layers[l];
    const std::uint64_t s = derive_seed(seed, l);
    Matrix w;
    switch (L.init) {
      case InitScheme::SemiOrthogonal:
        w = semi_orthogonal_init(L.d_out, L.d_in, s);
        break;
      case InitScheme::ColNormalizedGaussian:
        w = rng_gaussian(L.d_out, L.d_in, s);
        normalize_columns(w);
        break;
      case InitScheme::RowNormalizedGaussian:
        w = rng_gaussian(L.d_out, L.d_in, s);
        normalize_rows(w);
        break;
      case InitScheme::RandomSign:
        w = rng_rademacher(L.d_out, L.d_in, s);
        break;
      case InitScheme::Kaiming:
        w = rng_gaussian(L.d_out, L.d_in, s);
        w *= 1.0 / std::sqrt(static_cast<double>(L.d_in));
        break;
    }
    if (L.init != InitScheme::Kaiming) w *= lmo_scale(L);
    params.push_back(std::move(w));
    if (L.has_bias()) params.emplace_back(L.d_out, 1);
  }
  return MlpModel(layers, std::move(params));
}

ForwardCache forward(const MlpModel& model, const Matrix& z) {
  if (z.cols() != model.input_dim()) {
    throw std::invalid_argument("input has " + std::to_string(z.cols()) + " features, model expects " +
                                std::to_string(model.input_dim()));
  }
  ForwardCache cache;
  cache.h.reserve(model.depth() + 1);
  cache.f.reserve(model.depth());
  cache.h.push_back(z);
  for (std::size_t l = 0; l < model.depth(); ++l) {
    Matrix f = matmul_nt(cache.h.back(), model.weight(l));
    if (const Matrix* b = model.bias(l)) {
      for (std::size_t i = 0; i < f.rows(); ++i) {
        auto r = f.row(i);
        for (std::size_t j = 0; j < r.size(); ++j) r[j] += (*b)[j];
      }
    }
    cache.h.push_back(apply_activation(model.layers()[l].activation, f));
    cache.f.push_back(std::move(f));
  }
  return cache;
}

ForwardCache forward(const MlpModel& model, std::span<const double> z) {
  if (z.size() != model.input_dim()) {
    throw std::invalid_argument("input has length " + std::to_string(z.size()) +
                                ", model expects " + std::to_string(model.input_dim()));
  }
  return forward(model, Matrix::from_vector(z).transpose());
}

ParamList backward(const MlpModel& model, const ForwardCache& cache, const Matrix& dlogits) {
  const std::size_t depth = model.depth();
  if (cache.f.size() != depth || !dlogits.same_shape(cache.f.back())) {
    throw std::invalid_argument("backward: cache or logit gradient does not match the model");
  }
  ParamList grads(model.params().size());
  Matrix dh = dlogits;
  for (std::size_t l = depth; l-- > 0;) {
    const Activation act = model.layers()[l].activation;
    Matrix df = std::move(dh);
    if (act != Activation::Identity) {
      const Matrix& f = cache.f[l];
      for (std::size_t i = 0; i < df.size(); ++i) df[i] *= activate_derivative(act, f[i]);
    }
    const std::size_t wi = model.weight_index(l);
    grads[wi] = matmul_tn(df, cache.h[l]);
    if (model.bias(l) != nullptr) {
      Matrix gb(df.cols(), 1);
      for (std::size_t i = 0; i < df.rows(); ++i) {
        auto r = df.row(i);
        for (std::size_t j = 0; j < r.size(); ++j) gb[j] += r[j];
      }
      grads[wi + 1] = std::move(gb);
    }
    if (l > 0) dh = matmul(df, model.weight(l));
  }
  return grads;
}

double loss_at_logits(const Matrix& logits, const Batch& batch, LossKind kind, Matrix* dlogits) {
  const std::size_t n = logits.rows();
  if (n == 0) throw std::invalid_argument("empty batch");
  const double inv_n = 1.0 / static_cast<double>(n);
  if (dlogits != nullptr) *dlogits = Matrix(logits.rows(), logits.cols());
  double total = 0.0;
  if (kind == LossKind::MSE) {
    if (!batch.targets.same_shape(logits)) {
      throw std::invalid_argument("MSE targets are " + batch.targets.shape_string() +
                                  ", logits are " + logits.shape_string());
    }
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      auto f = logits.row(i);
      auto y = batch.targets.row(i);
      for (std::size_t j = 0; j < f.size(); ++j) {
        const double r = f[j] - y[j];
        s += r * r;
        if (dlogits != nullptr) (*dlogits)(i, j) = r * inv_n;
      }
      total += 0.5 * s;
    }
    return total * inv_n;
  }
  if (batch.labels.size() != n) {
    throw std::invalid_argument("expected " + std::to_string(n) + " labels, got " +
                                std::to_string(batch.labels.size()));
  }
  for (std::size_t i = 0; i < n; ++i) {
    auto f = logits.row(i);
    const std::size_t y = batch.labels[i];
    if (y >= f.size()) {
      throw std::invalid_argument("label " + std::to_string(y) + " out of range for " +
                                  std::to_string(f.size()) + " classes");
    }
    const double m = *std::max_element(f.begin(), f.end());
    double z = 0.0;
    for (double v : f) z += std::exp(v - m);
    const double lse = m + std::log(z);
    total += lse - f[y];
    if (dlogits != nullptr) {
      for (std::size_t j = 0; j < f.size(); ++j) {
        const double p = std::exp(f[j] - lse);
        (*dlogits)(i, j) = (p - (j == y ? 1.0 : 0.0)) * inv_n;
      }
    }
  }
  return total * inv_n;
}

LossAndGrad loss_and_grad(const MlpModel& model, const Batch& batch, LossKind kind) {
  const ForwardCache cache = forward(model, batch.x);
  Matrix dlogits;
  LossAndGrad out;
  out.loss = loss_at_logits(cache.logits(), batch, kind, &dlogits);
  out.grad = backward(model, cache, dlogits);
  return out;
}

double loss_only(const MlpModel& model, const Batch& batch, LossKind kind) {
  const ForwardCache cache = forward(model, batch.x);
  return loss_at_logits(cache.logits(), batch, kind, nullptr);
}

}  // namespace scion
