// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "scion/linalg/matrix.hpp"
#include "scion/lmo/norm_spec.hpp"

namespace scion {

enum class Activation { ReLU, ScaledReLU2, ScaledGELU, Tanh, Identity };
enum class InitScheme { SemiOrthogonal, ColNormalizedGaussian, RowNormalizedGaussian, RandomSign, Kaiming };

std::string_view activation_name(Activation a);
Activation parse_activation(std::string_view name);
std::string_view init_name(InitScheme s);
InitScheme parse_init(std::string_view name);

double activate(Activation a, double x);
double activate_derivative(Activation a, double x);

/// h_l = act(W_l h_{l-1} + b_l). The weight norm carries radius 1; rho_scale
/// is the layer scaling in the composite norm.
struct LayerSpec {
  std::size_t d_in = 1;
  std::size_t d_out = 1;
  Activation activation = Activation::Identity;
  InitScheme init = InitScheme::SemiOrthogonal;
  NormSpec weight_norm;
  std::optional<NormSpec> bias_norm;
  double rho_scale = 1.0;
  double bias_rho = 1.0;

  bool has_bias() const { return bias_norm.has_value(); }
};

/// Multiplier that turns a unit "shape" matrix (orthonormal frame, unit
/// columns, unit rows, +-1 entries) into the layer's lmo output magnitude:
/// rho * sqrt(d_out/d_in) for Spectral, rho * sqrt(d_out) for ColNorm,
/// rho / sqrt(d_in) for RowNorm, rho for Sign.
double lmo_scale(const LayerSpec& spec);

/// Checks dimension chaining, the norm shapes and an Identity last layer.
void validate_layers(const std::vector<LayerSpec>& layers);

ModelNormSpec model_norm_spec(const std::vector<LayerSpec>& layers);

/// Parameters are stored flat in composite-norm order: W_1, [b_1], W_2, ...
/// Biases are d_out x 1 columns.
class MlpModel {
 public:
  MlpModel() = default;
  MlpModel(std::vector<LayerSpec> layers, ParamList params);

  const std::vector<LayerSpec>& layers() const { return layers_; }
  std::size_t depth() const { return layers_.size(); }
  std::size_t input_dim() const { return layers_.front().d_in; }
  std::size_t output_dim() const { return layers_.back().d_out; }

  ParamList& params() { return params_; }
  const ParamList& params() const { return params_; }
  const Matrix& weight(std::size_t l) const { return params_[weight_index_[l]]; }
  Matrix& weight(std::size_t l) { return params_[weight_index_[l]]; }
  /// nullptr when the layer has no bias.
  const Matrix* bias(std::size_t l) const;
  std::size_t weight_index(std::size_t l) const { return weight_index_[l]; }

  ModelNormSpec norm_spec() const { return model_norm_spec(layers_); }

 private:
  std::vector<LayerSpec> layers_;
  ParamList params_;
  std::vector<std::size_t> weight_index_;
};

/// Draws each weight per its scheme and scales it by lmo_scale; Kaiming
/// draws N(0, 1/d_in) unscaled. Biases start at zero. Layer l uses the RNG
/// stream derive_seed(seed, l).
MlpModel init_model(const std::vector<LayerSpec>& layers, std::uint64_t seed);

/// Pre-activations f[l] and activations h[l] for a batch (one row per
/// sample). h[0] is the input; f[l], h[l+1] belong to layer l.
struct ForwardCache {
  std::vector<Matrix> f;
  std::vector<Matrix> h;

  const Matrix& logits() const { return f.back(); }
};

/// Batched forward pass over the rows of `z`.
ForwardCache forward(const MlpModel& model, const Matrix& z);
/// Single sample.
ForwardCache forward(const MlpModel& model, std::span<const double> z);

/// Gradient of sum_b <dlogits_b, logits_b> with respect to every parameter,
/// in parameter order. Callers fold any 1/B into dlogits.
ParamList backward(const MlpModel& model, const ForwardCache& cache, const Matrix& dlogits);

enum class LossKind { MSE, Logistic };

std::string_view loss_name(LossKind k);
LossKind parse_loss(std::string_view name);

/// Inputs are rows of x. MSE uses targets (B x d_L); Logistic uses labels.
struct Batch {
  Matrix x;
  Matrix targets;
  std::vector<std::size_t> labels;

  std::size_t size() const { return x.rows(); }
};

struct LossAndGrad {
  double loss = 0.0;
  ParamList grad;
};

/// Loss value and its gradient at the logits, both averaged over the batch.
/// MSE is 0.5 ||f - y||^2 per sample; Logistic is softmax cross-entropy.
double loss_at_logits(const Matrix& logits, const Batch& batch, LossKind kind, Matrix* dlogits);

LossAndGrad loss_and_grad(const MlpModel& model, const Batch& batch, LossKind kind);
double loss_only(const MlpModel& model, const Batch& batch, LossKind kind);

}  // namespace scion
