// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>

#include "scion/linalg/matrix.hpp"
#include "scion/linalg/newton_schulz.hpp"
#include "scion/lmo/norm_spec.hpp"

namespace scion {

enum class VecNorm { L1, L2, Linf, RMS };

/// Throws std::invalid_argument on an empty vector.
double vec_norm(std::span<const double> z, VecNorm which);

enum class SpectralMethod { ExactSvd, NewtonSchulz };

struct LmoOptions {
  SpectralMethod spectral = SpectralMethod::ExactSvd;
  int ns_iters = kDefaultNewtonSchulzIters;
};

/// ||a|| in the spec's norm (radius ignored).
double op_norm(const Matrix& a, const NormSpec& spec);

/// argmin_{||x|| <= radius} <s, x>.
///
/// Conventions at non-unique points: sign(0) = 0, a zero column/row gives a
/// zero column/row, and lmo(0) = 0.
Matrix lmo(const Matrix& s, const NormSpec& spec, const LmoOptions& opts = {});

/// -<s, lmo(s)> / radius. Equals the dual norm on the exact path.
double dual_norm(const Matrix& s, const NormSpec& spec, const LmoOptions& opts = {});

/// Dual norm by its closed form (entrywise l1, nuclear norm, ...), independent
/// of the lmo.
double dual_norm_closed_form(const Matrix& s, const NormSpec& spec);

/// s# = -(1/radius) ||s||_* lmo(s).
Matrix sharp_op(const Matrix& s, const NormSpec& spec, const LmoOptions& opts = {});

// ---- composite model norm ------------------------------------------------

double composite_norm(const ParamList& params, const ModelNormSpec& spec);

/// Per-tensor rho_l * lmo_l(s_l): the lmo of the composite unit ball.
ParamList composite_lmo(const ParamList& s, const ModelNormSpec& spec, const LmoOptions& opts = {});

/// sum_l rho_l ||s_l||_*, the dual of the max-composite norm.
double composite_dual_norm(const ParamList& s, const ModelNormSpec& spec,
                           const LmoOptions& opts = {});

/// Sharp operator of the composite norm: -D * composite_lmo(s), D = composite_dual_norm(s).
ParamList composite_sharp(const ParamList& s, const ModelNormSpec& spec,
                          const LmoOptions& opts = {});

/// sum_l <g_l, x_l - rho_l lmo_l(g_l)>.
double fw_gap(const ParamList& grad, const ParamList& x, const ModelNormSpec& spec,
              const LmoOptions& opts = {});

}  // namespace scion
