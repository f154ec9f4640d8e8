// SPDX-License-Identifier: Apache-2.0
#include "scion/models/presets.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace scion {

std::string_view domain_name(Domain d) {
  switch (d) {
    case Domain::Image: return "image";
    case Domain::OneHot: return "onehot";
    case Domain::WeightShared: return "weight-shared";
  }
  return "?";
}

Domain parse_domain(std::string_view name) {
  for (Domain d : {Domain::Image, Domain::OneHot, Domain::WeightShared}) {
    if (domain_name(d) == name) return d;
  }
  throw std::invalid_argument("unknown domain '" + std::string(name) +
                              "' (expected image|onehot|weight-shared)");
}

std::string_view family_name(NormFamily f) {
  switch (f) {
    case NormFamily::Recommended: return "recommended";
    case NormFamily::Spectral: return "spectral";
    case NormFamily::ColNorm: return "colnorm";
    case NormFamily::RowNorm: return "rownorm";
    case NormFamily::Sign: return "sign";
  }
  return "?";
}

NormFamily parse_family(std::string_view name) {
  for (NormFamily f : {NormFamily::Recommended, NormFamily::Spectral, NormFamily::ColNorm,
                       NormFamily::RowNorm, NormFamily::Sign}) {
    if (family_name(f) == name) return f;
  }
  throw std::invalid_argument("unknown norm family '" + std::string(name) +
                              "' (expected recommended|spectral|colnorm|rownorm|sign)");
}

InitScheme boundary_init_for(NormKind kind) {
  switch (kind) {
    case NormKind::Spectral: return InitScheme::SemiOrthogonal;
    case NormKind::ColNorm: return InitScheme::ColNormalizedGaussian;
    case NormKind::RowNorm: return InitScheme::RowNormalizedGaussian;
    default: return InitScheme::RandomSign;
  }
}

namespace {

struct Choice {
  NormKind kind;
  double rho;
};

Choice recommended(Domain domain, bool first, bool last, double din, double dout, NormKind last_kind) {
  if (last) {
    switch (last_kind) {
      case NormKind::Sign: return {NormKind::Sign, 1.0 / din};
      case NormKind::Spectral: return {NormKind::Spectral, 1.0};
      case NormKind::RowNorm: return {NormKind::RowNorm, 1.0};
      default: throw std::invalid_argument("last layer norm must be sign, spectral or rownorm");
    }
  }
  if (first) {
    switch (domain) {
      // Spectral lmo scale sqrt(d_out/d_in) lifted to max(1, sqrt(d_out/d_in)).
      case Domain::Image: return {NormKind::Spectral, std::max(1.0, std::sqrt(din / dout))};
      case Domain::OneHot: return {NormKind::ColNorm, 1.0};
      case Domain::WeightShared: return {NormKind::Sign, 1.0};
    }
  }
  return {NormKind::Spectral, 1.0};
}

Choice same_norm(NormFamily family, bool onehot_input, double din) {
  switch (family) {
    case NormFamily::Spectral: return {NormKind::Spectral, onehot_input ? std::sqrt(din) : 1.0};
    case NormFamily::ColNorm: return {NormKind::ColNorm, onehot_input ? 1.0 : 1.0 / din};
    case NormFamily::RowNorm: return {NormKind::RowNorm, onehot_input ? std::sqrt(din) : 1.0};
    case NormFamily::Sign: return {NormKind::Sign, onehot_input ? 1.0 : 1.0 / din};
    case NormFamily::Recommended: break;
  }
  throw std::logic_error("same_norm called with the recommended family");
}

}  // namespace

std::vector<LayerSpec> build_config(Domain domain, const std::vector<std::size_t>& dims,
                                    const BuildOptions& opts) {
  if (dims.size() < 2) throw std::invalid_argument("dims needs an input and at least one layer width");
  for (std::size_t d : dims) {
    if (d == 0) throw std::invalid_argument("dims must be positive");
  }
  const std::size_t depth = dims.size() - 1;
  std::vector<LayerSpec> layers;
  for (std::size_t l = 0; l < depth; ++l) {
    const bool first = l == 0;
    const bool last = l + 1 == depth;
    const double din = static_cast<double>(dims[l]);
    const double dout = static_cast<double>(dims[l + 1]);
    const Choice c = opts.family == NormFamily::Recommended
                         ? recommended(domain, first, last, din, dout, opts.last)
                         : same_norm(opts.family, first && domain != Domain::Image, din);
    LayerSpec L;
    L.d_in = dims[l];
    L.d_out = dims[l + 1];
    L.activation = last ? Activation::Identity : opts.hidden;
    L.init = boundary_init_for(c.kind);
    L.weight_norm = NormSpec::matrix(c.kind, L.d_out, L.d_in);
    L.rho_scale = c.rho;
    if (opts.bias && !last) {
      const NormKind bk = opts.family == NormFamily::Sign ? NormKind::MaxVec : NormKind::RmsVec;
      L.bias_norm = NormSpec::vector(bk, L.d_out);
      L.bias_rho = 1.0;
    }
    layers.push_back(L);
  }
  validate_layers(layers);
  return layers;
}

}  // namespace scion
