// SPDX-License-Identifier: Apache-2.0
#include "scion/lmo/lmo.hpp"

#include <cmath>
#include <stdexcept>

#include "scion/linalg/kernels.hpp"
#include "scion/linalg/svd.hpp"

namespace scion {

namespace {

bool in_safe_range(double m) { return m > 1e-100 && m < 1e100; }

double l2(std::span<const double> z) {
  const auto& k = kernels::active();
  const double m = k.max_abs(z.data(), z.size());
  if (m == 0.0) return 0.0;
  if (in_safe_range(m)) return std::sqrt(k.sum_squares(z.data(), z.size()));
  double acc = 0.0;
  for (double v : z) acc += (v / m) * (v / m);
  return m * std::sqrt(acc);
}

// Copy of s rescaled so that squared sums cannot overflow or underflow. The
// column/row/vector lmos are scale invariant, so they run on this copy.
Matrix tame(const Matrix& s) {
  const double m = max_abs(s);
  if (in_safe_range(m)) return s;
  return s * (1.0 / m);
}

std::vector<double> column_norms(const Matrix& a) {
  std::vector<double> acc(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto r = a.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) acc[j] += r[j] * r[j];
  }
  for (double& v : acc) v = std::sqrt(v);
  return acc;
}

Matrix sign_lmo(const Matrix& s, double rho) {
  Matrix out(s.rows(), s.cols());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double v = s[i];
    out[i] = v > 0.0 ? -rho : (v < 0.0 ? rho : 0.0);
  }
  return out;
}

Matrix colnorm_lmo(const Matrix& s0, double scale) {
  const Matrix s = tame(s0);
  const auto norms = column_norms(s);
  std::vector<double> f(norms.size());
  for (std::size_t j = 0; j < f.size(); ++j) f[j] = norms[j] > 0.0 ? -scale / norms[j] : 0.0;
  Matrix out(s.rows(), s.cols());
  for (std::size_t i = 0; i < s.rows(); ++i) {
    auto in = s.row(i);
    auto o = out.row(i);
    for (std::size_t j = 0; j < in.size(); ++j) o[j] = in[j] * f[j];
  }
  return out;
}

Matrix rownorm_lmo(const Matrix& s0, double scale) {
  const Matrix s = tame(s0);
  Matrix out(s.rows(), s.cols());
  for (std::size_t i = 0; i < s.rows(); ++i) {
    auto in = s.row(i);
    const double n = std::sqrt(kernels::sum_squares(in));
    if (n == 0.0) continue;
    const double f = -scale / n;
    auto o = out.row(i);
    for (std::size_t j = 0; j < in.size(); ++j) o[j] = in[j] * f;
  }
  return out;
}

Matrix direction_lmo(const Matrix& s0, double scale) {
  const Matrix s = tame(s0);
  const double n = l2(s.values());
  return s * (-scale / n);
}

Matrix spectral_lmo(const Matrix& s, double scale, const LmoOptions& opts) {
  Matrix q = opts.spectral == SpectralMethod::NewtonSchulz
                 ? newton_schulz_orthogonalize(s, opts.ns_iters)
                 : polar_factor(svd_reduced(s));
  q *= -scale;
  return q;
}

}  // namespace

double vec_norm(std::span<const double> z, VecNorm which) {
  if (z.empty()) throw std::invalid_argument("vec_norm of an empty vector");
  const auto& k = kernels::active();
  switch (which) {
    case VecNorm::L1:
      return k.sum_abs(z.data(), z.size());
    case VecNorm::L2:
      return l2(z);
    case VecNorm::Linf:
      return k.max_abs(z.data(), z.size());
    case VecNorm::RMS:
      return l2(z) / std::sqrt(static_cast<double>(z.size()));
  }
  return 0.0;
}

double op_norm(const Matrix& a, const NormSpec& spec) {
  spec.check_operand(a);
  const double dout = static_cast<double>(spec.d_out);
  const double din = static_cast<double>(spec.d_in);
  switch (spec.kind) {
    case NormKind::Sign:
    case NormKind::MaxVec:
      return max_abs(a);
    case NormKind::ColNorm: {
      const double m = max_abs(a);
      if (m == 0.0) return 0.0;
      const Matrix t = tame(a);
      double best = 0.0;
      for (double n : column_norms(t)) best = std::max(best, n);
      return (in_safe_range(m) ? best : best * m) / std::sqrt(dout);
    }
    case NormKind::RowNorm: {
      double best = 0.0;
      for (std::size_t i = 0; i < a.rows(); ++i) best = std::max(best, l2(a.row(i)));
      return std::sqrt(din) * best;
    }
    case NormKind::Spectral:
      return std::sqrt(din / dout) * spectral_norm(a);
    case NormKind::EuclideanVec:
      return l2(a.values());
    case NormKind::RmsVec:
      return vec_norm(a.values(), VecNorm::RMS);
  }
  return 0.0;
}

Matrix lmo(const Matrix& s, const NormSpec& spec, const LmoOptions& opts) {
  spec.check_operand(s);
  if (is_zero(s)) return Matrix(s.rows(), s.cols());
  const double rho = spec.radius;
  const double dout = static_cast<double>(spec.d_out);
  const double din = static_cast<double>(spec.d_in);
  switch (spec.kind) {
    case NormKind::Sign:
    case NormKind::MaxVec:
      return sign_lmo(s, rho);
    case NormKind::ColNorm:
      return colnorm_lmo(s, rho * std::sqrt(dout));
    case NormKind::RowNorm:
      return rownorm_lmo(s, rho / std::sqrt(din));
    case NormKind::Spectral:
      return spectral_lmo(s, rho * std::sqrt(dout / din), opts);
    case NormKind::EuclideanVec:
      return direction_lmo(s, rho);
    case NormKind::RmsVec:
      return direction_lmo(s, rho * std::sqrt(static_cast<double>(spec.dim())));
  }
  return Matrix(s.rows(), s.cols());
}

double dual_norm(const Matrix& s, const NormSpec& spec, const LmoOptions& opts) {
  return -inner(s, lmo(s, spec, opts)) / spec.radius + 0.0;
}

double dual_norm_closed_form(const Matrix& s, const NormSpec& spec) {
  spec.check_operand(s);
  const double dout = static_cast<double>(spec.d_out);
  const double din = static_cast<double>(spec.d_in);
  switch (spec.kind) {
    case NormKind::Sign:
    case NormKind::MaxVec:
      return vec_norm(s.values(), VecNorm::L1);
    case NormKind::ColNorm: {
      double sum = 0.0;
      for (std::size_t j = 0; j < s.cols(); ++j) sum += l2(s.column(j));
      return std::sqrt(dout) * sum;
    }
    case NormKind::RowNorm: {
      double sum = 0.0;
      for (std::size_t i = 0; i < s.rows(); ++i) sum += l2(s.row(i));
      return sum / std::sqrt(din);
    }
    case NormKind::Spectral:
      return std::sqrt(dout / din) * nuclear_norm(s);
    case NormKind::EuclideanVec:
      return l2(s.values());
    case NormKind::RmsVec:
      return std::sqrt(static_cast<double>(spec.dim())) * l2(s.values());
  }
  return 0.0;
}

Matrix sharp_op(const Matrix& s, const NormSpec& spec, const LmoOptions& opts) {
  Matrix l = lmo(s, spec, opts);
  const double dual = -inner(s, l) / spec.radius;
  l *= -dual / spec.radius;
  return l;
}

double composite_norm(const ParamList& params, const ModelNormSpec& spec) {
  spec.check_params(params);
  const auto pn = spec.params();
  double best = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    best = std::max(best, op_norm(params[i], pn[i].spec) / pn[i].rho);
  }
  return best;
}

ParamList composite_lmo(const ParamList& s, const ModelNormSpec& spec, const LmoOptions& opts) {
  spec.check_params(s);
  const auto pn = spec.params();
  ParamList out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    out.push_back(lmo(s[i], pn[i].spec, opts));
    out.back() *= pn[i].rho;
  }
  return out;
}

double composite_dual_norm(const ParamList& s, const ModelNormSpec& spec,
                           const LmoOptions& opts) {
  return -inner(s, composite_lmo(s, spec, opts)) + 0.0;
}

ParamList composite_sharp(const ParamList& s, const ModelNormSpec& spec, const LmoOptions& opts) {
  ParamList l = composite_lmo(s, spec, opts);
  const double dual = -inner(s, l);
  for (auto& m : l) m *= -dual;
  return l;
}

double fw_gap(const ParamList& grad, const ParamList& x, const ModelNormSpec& spec,
              const LmoOptions& opts) {
  require_same_shapes(grad, x, "fw_gap");
  const ParamList l = composite_lmo(grad, spec, opts);
  double gap = 0.0;
  for (std::size_t i = 0; i < grad.size(); ++i) gap += inner(grad[i], x[i] - l[i]);
  return gap;
}

}  // namespace scion
