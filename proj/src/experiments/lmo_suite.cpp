// SPDX-License-Identifier: Apache-2.0
#include "scion/experiments/lmo_suite.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "scion/linalg/rng.hpp"

namespace scion {

void LmoSuiteSpec::validate() const {
  if (kinds.empty()) throw std::invalid_argument("lmo suite needs at least one kind");
  if (samples == 0) throw std::invalid_argument("samples must be >= 1");
  if (max_dim == 0) throw std::invalid_argument("max_dim must be >= 1");
  for (double a : scales) {
    if (!(a > 0.0) || !std::isfinite(a)) throw std::invalid_argument("scales must be positive");
  }
  for (double t : {tol_boundary, tol_boundary_spectral, tol_dual, tol_scale}) {
    if (!(t >= 0.0)) throw std::invalid_argument("tolerances must be >= 0");
  }
  if (lmo.ns_iters < 0) throw std::invalid_argument("ns_iters must be >= 0");
}

std::vector<LmoSuiteRow> run_lmo_suite(const LmoSuiteSpec& spec) {
  spec.validate();
  std::vector<LmoSuiteRow> rows;
  for (std::size_t ki = 0; ki < spec.kinds.size(); ++ki) {
    const NormKind kind = spec.kinds[ki];
    Rng rng(derive_seed(spec.seed, static_cast<std::uint64_t>(kind)));
    LmoSuiteRow row;
    row.kind = kind;
    row.samples = spec.samples;
    const double tol_b = kind == NormKind::Spectral ? spec.tol_boundary_spectral : spec.tol_boundary;
    for (std::size_t t = 0; t < spec.samples; ++t) {
      const std::size_t r = 1 + rng.below(spec.max_dim);
      const std::size_t c = is_vector_kind(kind) ? 1 : 1 + rng.below(spec.max_dim);
      const double rho = 0.5 + 1.5 * rng.uniform();
      const NormSpec ns = is_vector_kind(kind) ? NormSpec::vector(kind, r, rho) : NormSpec::matrix(kind, r, c, rho);
      Matrix s = gaussian_matrix(r, c, rng);
      s *= std::pow(10.0, -3.0 + 6.0 * rng.uniform());

      const Matrix l = lmo(s, ns, spec.lmo);
      row.boundary = std::max(row.boundary, std::abs(op_norm(l, ns) - rho) / rho);
      const double rd = rho * dual_norm_closed_form(s, ns);
      row.dual = std::max(row.dual, std::abs(inner(s, l) + rd) / std::max(1.0, rd));
      for (double a : spec.scales) {
        row.scale = std::max(row.scale, max_abs(lmo(a * s, ns, spec.lmo) - l) / rho);
      }
    }
    row.pass = row.boundary <= tol_b && row.dual <= spec.tol_dual && row.scale <= spec.tol_scale;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace scion
