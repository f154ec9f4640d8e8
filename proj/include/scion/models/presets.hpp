// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "scion/models/mlp.hpp"

namespace scion {

enum class Domain { Image, OneHot, WeightShared };

/// Recommended mixes norms per layer position; the others use one norm
/// throughout, scaled per position.
enum class NormFamily { Recommended, Spectral, ColNorm, RowNorm, Sign };

struct BuildOptions {
  NormFamily family = NormFamily::Recommended;
  Activation hidden = Activation::ReLU;
  bool bias = false;
  /// Last-layer norm for the Recommended family: Sign, Spectral or RowNorm.
  NormKind last = NormKind::Sign;
};

std::string_view domain_name(Domain d);
Domain parse_domain(std::string_view name);
std::string_view family_name(NormFamily f);
NormFamily parse_family(std::string_view name);

/// Layer specs for widths dims = (d_0, d_1, ..., d_L), L >= 1.
///
/// Recommended: image Spectral -> Spectral -> Sign with the first layer's
/// lmo scaled by max(1, sqrt(d_out/d_in)); 1-hot ColNorm -> Spectral -> Sign;
/// weight sharing Sign -> Spectral -> Sign. The Sign last layer has lmo
/// scale 1/d_in. A one-layer model gets the last-layer rule.
std::vector<LayerSpec> build_config(Domain domain, const std::vector<std::size_t>& dims,
                                    const BuildOptions& opts = {});

InitScheme boundary_init_for(NormKind kind);

}  // namespace scion
