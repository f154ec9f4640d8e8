// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "scion/linalg/rng.hpp"
#include "scion/linalg/svd.hpp"
#include "scion/lmo/lmo.hpp"

using namespace scion;

namespace {

constexpr NormKind kAllKinds[] = {NormKind::Sign,         NormKind::ColNorm, NormKind::RowNorm,
                                  NormKind::Spectral,     NormKind::EuclideanVec,
                                  NormKind::MaxVec,       NormKind::RmsVec};

void expect_near_matrix(const Matrix& a, const Matrix& b, double tol) {
  ASSERT_TRUE(a.same_shape(b));
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], tol) << "entry " << i;
}

double max_diff(const Matrix& a, const Matrix& b) { return max_abs(a - b); }

struct Sample {
  NormSpec spec;
  Matrix s;
};

Sample random_sample(NormKind kind, Rng& rng) {
  const std::size_t rows = 1 + rng.below(64);
  const std::size_t cols = is_vector_kind(kind) && rng.below(2) == 0 ? 1 : 1 + rng.below(64);
  const double radius = 0.25 + 4.0 * rng.uniform();
  Matrix s = gaussian_matrix(rows, cols, rng);
  // Vary magnitude so the scale handling is exercised.
  s *= std::pow(10.0, -3.0 + 6.0 * rng.uniform());
  return {NormSpec::matrix(kind, rows, cols, radius), std::move(s)};
}

}  // namespace

// ---- vec_norm ---------------------------------------------------------------

TEST(VecNorm, Examples) {
  const std::vector<double> a{3, 4};
  EXPECT_DOUBLE_EQ(vec_norm(a, VecNorm::L2), 5.0);
  const std::vector<double> ones{1, 1, 1, 1};
  EXPECT_DOUBLE_EQ(vec_norm(ones, VecNorm::RMS), 1.0);
  const std::vector<double> b{3, -4};
  EXPECT_DOUBLE_EQ(vec_norm(b, VecNorm::L1), 7.0);
  EXPECT_DOUBLE_EQ(vec_norm(b, VecNorm::Linf), 4.0);
  EXPECT_LE(vec_norm(b, VecNorm::Linf), vec_norm(b, VecNorm::L2));
  EXPECT_LE(vec_norm(b, VecNorm::L2), vec_norm(b, VecNorm::L1));
}

TEST(VecNorm, EmptyIsError) {
  EXPECT_THROW(vec_norm(std::span<const double>{}, VecNorm::L2), std::invalid_argument);
}

TEST(VecNorm, ChainOnRandomVectors) {
  Rng rng(11);
  for (int t = 0; t < 50; ++t) {
    const std::size_t d = 1 + rng.below(100);
    Matrix z = gaussian_matrix(d, 1, rng);
    const double inf = vec_norm(z.values(), VecNorm::Linf);
    const double two = vec_norm(z.values(), VecNorm::L2);
    const double one = vec_norm(z.values(), VecNorm::L1);
    const double sd = std::sqrt(static_cast<double>(d));
    EXPECT_LE(inf, two * (1 + 1e-14));
    EXPECT_LE(two, one * (1 + 1e-14));
    EXPECT_LE(one, sd * two * (1 + 1e-14));
    EXPECT_LE(sd * two, d * inf * (1 + 1e-14));
  }
}

TEST(VecNorm, ExtremeMagnitudes) {
  const std::vector<double> big{3e200, 4e200};
  EXPECT_NEAR(vec_norm(big, VecNorm::L2) / 5e200, 1.0, 1e-15);
  const std::vector<double> tiny{3e-200, 4e-200};
  EXPECT_NEAR(vec_norm(tiny, VecNorm::L2) / 5e-200, 1.0, 1e-15);
}

// ---- op_norm ----------------------------------------------------------------

TEST(OpNorm, Examples) {
  const Matrix a = Matrix::from_rows({{2, -3}, {0, 1}});
  EXPECT_DOUBLE_EQ(op_norm(a, NormSpec::matrix(NormKind::Sign, 2, 2)), 3.0);
  const Matrix d = Matrix::from_rows({{3, 0}, {0, 4}});
  EXPECT_NEAR(op_norm(d, NormSpec::matrix(NormKind::Spectral, 2, 2)), 4.0, 1e-12);
  const Matrix c = Matrix::from_rows({{3}, {4}});
  EXPECT_NEAR(op_norm(c, NormSpec::matrix(NormKind::ColNorm, 2, 1)), 5.0 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(op_norm(c, NormSpec::matrix(NormKind::ColNorm, 2, 1)), 3.53553, 1e-5);
}

TEST(OpNorm, RowNormAndVectorKinds) {
  const Matrix a = Matrix::from_rows({{3, 4}, {1, 0}});
  EXPECT_NEAR(op_norm(a, NormSpec::matrix(NormKind::RowNorm, 2, 2)), std::sqrt(2.0) * 5.0, 1e-12);
  const Matrix v = Matrix::from_rows({{3}, {4}});
  EXPECT_DOUBLE_EQ(op_norm(v, NormSpec::vector(NormKind::EuclideanVec, 2)), 5.0);
  EXPECT_DOUBLE_EQ(op_norm(v, NormSpec::vector(NormKind::MaxVec, 2)), 4.0);
  EXPECT_NEAR(op_norm(v, NormSpec::vector(NormKind::RmsVec, 2)), 5.0 / std::sqrt(2.0), 1e-15);
}

TEST(OpNorm, ShapeMismatchIsError) {
  const Matrix a(3, 2);
  EXPECT_THROW(op_norm(a, NormSpec::matrix(NormKind::Sign, 2, 3)), std::invalid_argument);
  EXPECT_THROW(lmo(a, NormSpec::matrix(NormKind::Spectral, 2, 2)), std::invalid_argument);
}

TEST(NormSpec, Validation) {
  EXPECT_THROW(NormSpec::matrix(NormKind::Sign, 2, 2, 0.0), std::invalid_argument);
  EXPECT_THROW(NormSpec::matrix(NormKind::Sign, 2, 2, -1.0), std::invalid_argument);
  EXPECT_THROW(NormSpec::matrix(NormKind::Sign, 0, 2), std::invalid_argument);
  for (NormKind k : kAllKinds) EXPECT_EQ(parse_norm_kind(norm_kind_name(k)), k);
  EXPECT_THROW(parse_norm_kind("nuclear"), std::invalid_argument);
}

// ---- lmo examples -------------------------------------------------------------

TEST(Lmo, SignExample) {
  const Matrix s = Matrix::from_rows({{2, -3}, {0, 1}});
  const Matrix out = lmo(s, NormSpec::matrix(NormKind::Sign, 2, 2));
  EXPECT_EQ(out, Matrix::from_rows({{-1, 1}, {0, -1}}));
}

TEST(Lmo, SpectralRankOneExample) {
  const Matrix s = Matrix::from_rows({{5, 0}, {0, 0}});
  const Matrix out = lmo(s, NormSpec::matrix(NormKind::Spectral, 2, 2));
  expect_near_matrix(out, Matrix::from_rows({{-1, 0}, {0, 0}}), 1e-12);
}

TEST(Lmo, ColNormExample) {
  const Matrix s = Matrix::from_rows({{3}, {4}});
  const Matrix out = lmo(s, NormSpec::matrix(NormKind::ColNorm, 2, 1));
  expect_near_matrix(out, Matrix::from_rows({{-0.84853}, {-1.13137}}), 1e-5);
  expect_near_matrix(out, Matrix::from_rows({{-0.6 * std::sqrt(2.0)}, {-0.8 * std::sqrt(2.0)}}),
                     1e-15);
}

TEST(Lmo, EuclideanExample) {
  const Matrix s = Matrix::from_rows({{3}, {4}});
  const auto spec = NormSpec::vector(NormKind::EuclideanVec, 2, 2.0);
  const Matrix out = lmo(s, spec);
  expect_near_matrix(out, Matrix::from_rows({{-1.2}, {-1.6}}), 1e-15);
  EXPECT_NEAR(inner(s, out), -10.0, 1e-14);
}

TEST(Lmo, RmsVecHitsRadius) {
  const Matrix s = Matrix::from_rows({{1}, {-2}, {2}});
  const auto spec = NormSpec::vector(NormKind::RmsVec, 3, 0.5);
  EXPECT_NEAR(op_norm(lmo(s, spec), spec), 0.5, 1e-15);
}

TEST(Lmo, RowNormFormula) {
  const Matrix s = Matrix::from_rows({{3, 4}, {0, -2}});
  const Matrix out = lmo(s, NormSpec::matrix(NormKind::RowNorm, 2, 2));
  const double k = 1.0 / std::sqrt(2.0);
  expect_near_matrix(out, Matrix::from_rows({{-0.6 * k, -0.8 * k}, {0, k}}), 1e-15);
}

TEST(Lmo, ScaleInvarianceExampleAllKinds) {
  Rng rng(5);
  for (NormKind k : kAllKinds) {
    const Matrix s = gaussian_matrix(6, 4, rng);
    const auto spec = NormSpec::matrix(k, 6, 4);
    EXPECT_LE(max_diff(lmo(10.0 * s, spec), lmo(s, spec)), 1e-10) << norm_kind_name(k);
  }
}

TEST(Lmo, ZeroConventions) {
  for (NormKind k : kAllKinds) {
    const auto spec = NormSpec::matrix(k, 3, 2);
    const Matrix z(3, 2);
    EXPECT_TRUE(is_zero(lmo(z, spec))) << norm_kind_name(k);
    EXPECT_EQ(dual_norm(z, spec), 0.0);
    EXPECT_FALSE(std::signbit(dual_norm(z, spec)));
    EXPECT_TRUE(is_zero(sharp_op(z, spec)));
  }
  LmoOptions ns{SpectralMethod::NewtonSchulz, 5};
  EXPECT_TRUE(is_zero(lmo(Matrix(3, 3), NormSpec::matrix(NormKind::Spectral, 3, 3), ns)));
}

TEST(Lmo, ZeroColumnAndRow) {
  const Matrix s = Matrix::from_rows({{3, 0}, {4, 0}});
  const Matrix c = lmo(s, NormSpec::matrix(NormKind::ColNorm, 2, 2));
  EXPECT_EQ(c(0, 1), 0.0);
  EXPECT_EQ(c(1, 1), 0.0);
  const Matrix r = lmo(s.transpose(), NormSpec::matrix(NormKind::RowNorm, 2, 2));
  EXPECT_EQ(r(1, 0), 0.0);
  EXPECT_EQ(r(1, 1), 0.0);
}

TEST(Lmo, NewtonSchulzPathApproximatesExact) {
  Rng rng(9);
  const Matrix s = gaussian_matrix(16, 8, rng);
  const auto spec = NormSpec::matrix(NormKind::Spectral, 16, 8);
  const Matrix exact = lmo(s, spec);
  const Matrix ns = lmo(s, spec, {SpectralMethod::NewtonSchulz, 5});
  const double cosine = inner(exact, ns) / (frobenius_norm(exact) * frobenius_norm(ns));
  EXPECT_GE(cosine, 0.95);
  // Dual pairing only holds to the band on this path.
  const double rel = dual_norm(s, spec, {SpectralMethod::NewtonSchulz, 5}) / dual_norm(s, spec);
  EXPECT_GT(rel, 0.65);
  EXPECT_LT(rel, 1.35);
}

// ---- dual / sharp examples ------------------------------------------------------

TEST(DualNorm, Examples) {
  const Matrix a = Matrix::from_rows({{2, -3}, {0, 1}});
  EXPECT_DOUBLE_EQ(dual_norm(a, NormSpec::matrix(NormKind::Sign, 2, 2)), 6.0);
  const Matrix v = Matrix::from_rows({{3}, {4}});
  EXPECT_NEAR(dual_norm(v, NormSpec::vector(NormKind::EuclideanVec, 2)), 5.0, 1e-14);
  const Matrix d = Matrix::from_rows({{3, 0}, {0, 4}});
  EXPECT_NEAR(dual_norm(d, NormSpec::matrix(NormKind::Spectral, 2, 2)), 7.0, 1e-12);
}

TEST(DualNorm, RadiusDoesNotChangeDual) {
  const Matrix a = Matrix::from_rows({{2, -3}, {0, 1}});
  EXPECT_DOUBLE_EQ(dual_norm(a, NormSpec::matrix(NormKind::Sign, 2, 2, 0.25)), 6.0);
}

TEST(SharpOp, Examples) {
  const Matrix v = Matrix::from_rows({{3}, {4}});
  for (double rho : {0.5, 1.0, 3.0}) {
    expect_near_matrix(sharp_op(v, NormSpec::vector(NormKind::EuclideanVec, 2, rho)), v, 1e-14);
  }
  // ||s||_1 sign(s) = 3 * [1, -1].
  const Matrix w = Matrix::from_rows({{2}, {-1}});
  for (double rho : {0.5, 1.0, 3.0}) {
    expect_near_matrix(sharp_op(w, NormSpec::vector(NormKind::MaxVec, 2, rho)),
                       Matrix::from_rows({{3}, {-3}}), 1e-14);
  }
}

// ---- properties over random inputs ------------------------------------------

TEST(LmoProperties, BoundaryDualPairingScaleInvariance) {
  Rng rng(2024);
  for (NormKind kind : kAllKinds) {
    const double boundary_tol = kind == NormKind::Spectral ? 1e-8 : 1e-10;
    for (int t = 0; t < 100; ++t) {
      const auto [spec, s] = random_sample(kind, rng);
      const Matrix l = lmo(s, spec);
      EXPECT_NEAR(op_norm(l, spec), spec.radius, boundary_tol * spec.radius)
          << norm_kind_name(kind) << " " << s.shape_string();
      const double closed = dual_norm_closed_form(s, spec);
      EXPECT_NEAR(inner(s, l) + spec.radius * closed, 0.0, 1e-8 * spec.radius * closed)
          << norm_kind_name(kind) << " " << s.shape_string();
      for (double a : {0.5, 2.0, 10.0}) {
        const Matrix la = lmo(a * s, spec);
        if (kind == NormKind::Sign || kind == NormKind::MaxVec) {
          EXPECT_EQ(la, l);
        } else {
          EXPECT_LE(max_diff(la, l), 1e-10 * spec.radius) << norm_kind_name(kind) << " a=" << a;
        }
      }
    }
  }
}

TEST(LmoProperties, SharpConsistency) {
  Rng rng(77);
  for (NormKind kind : kAllKinds) {
    for (int t = 0; t < 30; ++t) {
      const auto [spec, s] = random_sample(kind, rng);
      const double dual = dual_norm(s, spec);
      EXPECT_NEAR(inner(s, sharp_op(s, spec)), dual * dual, 1e-8 * dual * dual)
          << norm_kind_name(kind);
    }
  }
}

TEST(LmoProperties, LmoIsOddAndFeasibleForNonGeneric) {
  // Inputs with repeated and zero entries still give feasible, odd outputs.
  Rng rng(3);
  for (NormKind kind : kAllKinds) {
    Matrix s = gaussian_matrix(5, 4, rng);
    for (std::size_t i = 0; i < s.size(); i += 3) s[i] = 0.0;
    s(1, 1) = s(2, 2) = 1.5;
    const auto spec = NormSpec::matrix(kind, 5, 4, 2.0);
    const Matrix l = lmo(s, spec);
    EXPECT_LE(op_norm(l, spec), 2.0 * (1 + 1e-10));
    EXPECT_LE(max_diff(lmo(-1.0 * s, spec), -1.0 * l), 1e-10);
  }
}

TEST(LmoProperties, BruteForceOptimalitySignAndMax) {
  Rng rng(42);
  for (NormKind kind : {NormKind::Sign, NormKind::MaxVec}) {
    for (int t = 0; t < 200; ++t) {
      Matrix s = gaussian_matrix(2, 2, rng);
      if (t % 5 == 0) s[rng.below(4)] = 0.0;
      const double rho = t % 2 == 0 ? 1.0 : 0.3 + rng.uniform();
      const auto spec = NormSpec::matrix(kind, 2, 2, rho);
      double best = INFINITY;
      for (unsigned pattern = 0; pattern < 16; ++pattern) {
        Matrix x(2, 2);
        for (unsigned i = 0; i < 4; ++i) x[i] = (pattern >> i & 1u) ? rho : -rho;
        best = std::min(best, inner(s, x));
      }
      EXPECT_EQ(inner(s, lmo(s, spec)), best) << norm_kind_name(kind) << " t=" << t;
    }
  }
}

TEST(LmoProperties, OperatorNormTransfer) {
  // Direct computation of the induced norms involved.
  auto rms_to_rms = [](const Matrix& a) {
    return std::sqrt(double(a.cols()) / double(a.rows())) * spectral_norm(a);
  };
  auto one_to_rms = [](const Matrix& a) {
    double best = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) best = std::max(best, vec_norm(a.column(j), VecNorm::L2));
    return best / std::sqrt(double(a.rows()));
  };
  auto inf_to_inf = [](const Matrix& a) {
    double best = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) best = std::max(best, vec_norm(a.row(i), VecNorm::L1));
    return best;
  };
  auto rms_to_inf = [](const Matrix& a) {
    double best = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) best = std::max(best, vec_norm(a.row(i), VecNorm::L2));
    return std::sqrt(double(a.cols())) * best;
  };
  auto one_to_inf = [](const Matrix& a) { return max_abs(a); };

  Rng rng(8);
  for (int t = 0; t < 100; ++t) {
    const std::size_t m = 1 + rng.below(40);
    const std::size_t n = 1 + rng.below(40);
    const Matrix a = gaussian_matrix(m, n, rng);
    const double din = double(n);
    EXPECT_LE(rms_to_rms(a), din * one_to_rms(a) * (1 + 1e-12));
    EXPECT_LE(inf_to_inf(a), std::sqrt(din) * rms_to_inf(a) * (1 + 1e-12));
    EXPECT_LE(inf_to_inf(a), din * one_to_inf(a) * (1 + 1e-12));
    // The NormSpec kinds agree with these direct computations.
    EXPECT_NEAR(op_norm(a, NormSpec::matrix(NormKind::Spectral, m, n)), rms_to_rms(a), 1e-12 * rms_to_rms(a));
    EXPECT_NEAR(op_norm(a, NormSpec::matrix(NormKind::ColNorm, m, n)), one_to_rms(a), 1e-12 * one_to_rms(a));
    EXPECT_NEAR(op_norm(a, NormSpec::matrix(NormKind::RowNorm, m, n)), rms_to_inf(a), 1e-12 * rms_to_inf(a));
  }
}

// ---- composite -----------------------------------------------------------------

namespace {

ModelNormSpec two_layer_spec() {
  ModelNormSpec spec;
  spec.layers.push_back({NormSpec::matrix(NormKind::Spectral, 3, 2), std::nullopt, 1.0});
  spec.layers.push_back({NormSpec::matrix(NormKind::Sign, 2, 3), std::nullopt, 2.0});
  return spec;
}

}  // namespace

TEST(Composite, NormExample) {
  const auto spec = two_layer_spec();
  // Spectral op norm 0.5 on layer 1, Sign op norm 3 on layer 2.
  Matrix w1(3, 2);
  w1(0, 0) = 0.5 / std::sqrt(2.0 / 3.0);
  Matrix w2(2, 3);
  w2(1, 2) = -3.0;
  EXPECT_NEAR(composite_norm({w1, w2}, spec), 1.5, 1e-12);
  EXPECT_EQ(composite_norm({Matrix(3, 2), Matrix(2, 3)}, spec), 0.0);
}

TEST(Composite, BoundaryExample) {
  ModelNormSpec spec;
  spec.layers.push_back({NormSpec::matrix(NormKind::Sign, 2, 2), std::nullopt, 0.25});
  const Matrix w = Matrix::from_rows({{0.25, -0.125}, {0, 0.25}});
  EXPECT_EQ(composite_norm({w}, spec), 1.0);
}

TEST(Composite, BiasUsesItsOwnNorm) {
  ModelNormSpec spec;
  spec.layers.push_back(
      {NormSpec::matrix(NormKind::Sign, 2, 2), NormSpec::vector(NormKind::RmsVec, 2), 1.0});
  EXPECT_EQ(spec.param_count(), 2u);
  const Matrix w = Matrix::from_rows({{0.5, 0}, {0, 0}});
  const Matrix b = Matrix::from_rows({{2}, {2}});
  EXPECT_NEAR(composite_norm({w, b}, spec), 2.0, 1e-15);
}

TEST(Composite, AlignmentMismatchIsError) {
  const auto spec = two_layer_spec();
  EXPECT_THROW(composite_norm({Matrix(3, 2)}, spec), std::invalid_argument);
  EXPECT_THROW(composite_norm({Matrix(2, 3), Matrix(3, 2)}, spec), std::invalid_argument);
}

TEST(Composite, ValidationRejectsBadLayers) {
  ModelNormSpec empty;
  EXPECT_THROW(empty.validate(), std::invalid_argument);
  auto spec = two_layer_spec();
  spec.layers[0].rho = 0.0;
  EXPECT_THROW(spec.validate(), std::invalid_argument);
  spec = two_layer_spec();
  spec.layers[1].weight.radius = 2.0;
  EXPECT_THROW(spec.validate(), std::invalid_argument);
}

TEST(Composite, LmoIsOnUnitBoundaryAndPairs) {
  const auto spec = two_layer_spec();
  Rng rng(4);
  const ParamList g{gaussian_matrix(3, 2, rng), gaussian_matrix(2, 3, rng)};
  const ParamList l = composite_lmo(g, spec);
  EXPECT_NEAR(composite_norm(l, spec), 1.0, 1e-10);
  const double dual = composite_dual_norm(g, spec);
  EXPECT_NEAR(dual, 1.0 * dual_norm(g[0], spec.layers[0].weight) +
                        2.0 * dual_norm(g[1], spec.layers[1].weight),
              1e-12 * dual);
  const ParamList sh = composite_sharp(g, spec);
  EXPECT_NEAR(inner(g, sh), dual * dual, 1e-10 * dual * dual);
  EXPECT_NEAR(composite_norm(sh, spec), dual, 1e-10 * dual);
}

TEST(FwGap, Examples) {
  ModelNormSpec spec;
  spec.layers.push_back({NormSpec::vector(NormKind::EuclideanVec, 2), std::nullopt, 1.0});
  const Matrix g = Matrix::from_rows({{3}, {4}});
  EXPECT_NEAR(fw_gap({g}, {Matrix(2, 1)}, spec), 5.0, 1e-14);
  EXPECT_EQ(fw_gap({Matrix(2, 1)}, {Matrix::from_rows({{0.3}, {0.1}})}, spec), 0.0);
  const ParamList at_lmo = composite_lmo({g}, spec);
  EXPECT_EQ(fw_gap({g}, at_lmo, spec), 0.0);
}

TEST(FwGap, NonnegativeOnFeasiblePoints) {
  const auto spec = two_layer_spec();
  Rng rng(6);
  for (int t = 0; t < 50; ++t) {
    const ParamList g{gaussian_matrix(3, 2, rng), gaussian_matrix(2, 3, rng)};
    ParamList x = composite_lmo({gaussian_matrix(3, 2, rng), gaussian_matrix(2, 3, rng)}, spec);
    const double shrink = rng.uniform();
    for (auto& m : x) m *= shrink;
    EXPECT_GE(fw_gap(g, x, spec), -1e-12);
  }
}
