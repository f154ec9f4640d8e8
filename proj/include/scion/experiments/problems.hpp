// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "scion/linalg/matrix.hpp"
#include "scion/linalg/rng.hpp"
#include "scion/lmo/norm_spec.hpp"
#include "scion/models/mlp.hpp"

namespace scion {

/// f(X) = 0.5 sum_ij h_ij X_ij^2 over a dim x dim matrix X, with the
/// eigenvalues h log-spaced in [1, conditioning]. Stochastic gradients add
/// i.i.d. Gaussian noise scaled so that E||xi||_2^2 = sigma^2.
struct StochasticQuadratic {
  std::size_t dim = 8;
  double sigma = 1.0;
  double conditioning = 4.0;
  NormKind norm = NormKind::Spectral;
  double rho = 1.0;

  void validate() const;

  Matrix curvature() const;
  double value(const Matrix& x) const;
  Matrix gradient(const Matrix& x) const;
  Matrix noisy_gradient(const Matrix& x, Rng& rng) const;
  /// Smoothness constant in the Frobenius geometry: max h = conditioning.
  double lipschitz() const { return conditioning; }

  ModelNormSpec norm_spec() const;
  /// A point on the unit sphere of the composite norm, drawn from `seed`.
  Matrix start_point(std::uint64_t seed) const;
};

/// Gaussian mixture classification: `clusters` centers per class, samples are
/// center + noise * N(0, I). Inputs are scaled by one global factor so that
/// every sample has RMS norm at most 1.
struct SyntheticClassification {
  std::size_t dim = 32;
  std::size_t classes = 4;
  std::size_t clusters = 4;
  double noise = 1.5;
  std::size_t n_train = 1024;
  std::size_t n_test = 256;

  void validate() const;
};

struct Dataset {
  Batch train;
  Batch test;

  std::size_t input_dim() const { return train.x.cols(); }
  std::size_t classes = 0;
};

Dataset gen_synthetic(const SyntheticClassification& spec, std::uint64_t seed);

/// IDX image/label files. Images are scaled to [0, 1], so their RMS norm is
/// at most 1. Errors name the offending field or byte offset.
Matrix load_idx_images(const std::string& path);
std::vector<std::size_t> load_idx_labels(const std::string& path);
Matrix parse_idx_images(const std::vector<unsigned char>& bytes);
std::vector<std::size_t> parse_idx_labels(const std::vector<unsigned char>& bytes);

/// Train images/labels are required; test paths may be empty.
Dataset load_idx_dataset(const std::string& train_images, const std::string& train_labels,
                         const std::string& test_images, const std::string& test_labels);

/// Rows `idx` of a batch.
Batch subset(const Batch& b, const std::vector<std::size_t>& idx);
/// `count` rows drawn uniformly with replacement.
Batch sample_batch(const Batch& b, std::size_t count, Rng& rng);

}  // namespace scion
