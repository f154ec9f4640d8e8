// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "scion/linalg/matrix.hpp"

namespace scion {

/// Norm families with a closed-form LMO.
///
/// Matrix kinds are operator norms on d_out x d_in weights:
///   Sign      1 -> inf     max |A_ij|
///   ColNorm   1 -> RMS     max_j ||col_j|| / sqrt(d_out)
///   RowNorm   RMS -> inf   max_i sqrt(d_in) ||row_i||
///   Spectral  RMS -> RMS   sqrt(d_in / d_out) sigma_max
/// Vector kinds treat the operand as a flat vector of d_out * d_in entries.
enum class NormKind { Sign, ColNorm, RowNorm, Spectral, EuclideanVec, MaxVec, RmsVec };

std::string_view norm_kind_name(NormKind k);
/// Throws std::invalid_argument on an unknown name.
NormKind parse_norm_kind(std::string_view name);
bool is_vector_kind(NormKind k);

struct NormSpec {
  NormKind kind = NormKind::Sign;
  double radius = 1.0;
  std::size_t d_out = 1;
  std::size_t d_in = 1;

  static NormSpec matrix(NormKind kind, std::size_t d_out, std::size_t d_in, double radius = 1.0);
  static NormSpec vector(NormKind kind, std::size_t length, double radius = 1.0);

  std::size_t dim() const { return d_out * d_in; }
  /// Throws std::invalid_argument on a non-positive radius or zero dimension.
  void validate() const;
  /// Throws std::invalid_argument when `a` is not d_out x d_in.
  void check_operand(const Matrix& a) const;

  bool operator==(const NormSpec&) const = default;
};

/// One layer of the composite norm max_l (1/rho_l) max(||W_l||, ||b_l||).
/// Layer norm specs carry radius 1; rho is the only scaling. The bias may be
/// given its own scaling (the bias lmos of the layer tables are unscaled).
struct LayerNorm {
  NormSpec weight;
  std::optional<NormSpec> bias;
  double rho = 1.0;
  std::optional<double> bias_rho;
};

/// A parameter tensor's norm and the scaling of the layer it belongs to.
struct ParamNorm {
  NormSpec spec;
  double rho = 1.0;
  std::size_t layer = 0;
};

/// Parameters are laid out layer by layer: W_1, [b_1], W_2, [b_2], ...
struct ModelNormSpec {
  std::vector<LayerNorm> layers;

  void validate() const;
  std::size_t param_count() const;
  std::vector<ParamNorm> params() const;
  /// Throws std::invalid_argument unless `p` matches the layout in count and shapes.
  void check_params(const ParamList& p) const;
};

}  // namespace scion
