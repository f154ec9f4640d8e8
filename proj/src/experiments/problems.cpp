// SPDX-License-Identifier: Apache-2.0
#include "scion/experiments/problems.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>
#include <stdexcept>

#include "scion/lmo/lmo.hpp"

namespace scion {

// ---- StochasticQuadratic ----------------------------------------------------

void StochasticQuadratic::validate() const {
  if (dim < 1) throw std::invalid_argument("quadratic dim must be >= 1");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("quadratic sigma must be >= 0");
  if (!(conditioning >= 1.0) || !std::isfinite(conditioning)) {
    throw std::invalid_argument("quadratic conditioning must be >= 1");
  }
  if (!(rho > 0.0) || !std::isfinite(rho)) throw std::invalid_argument("quadratic rho must be > 0");
  if (is_vector_kind(norm)) throw std::invalid_argument("quadratic norm must be a matrix norm");
}

Matrix StochasticQuadratic::curvature() const {
  Matrix h(dim, dim);
  const std::size_t n = h.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double t = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
    h[i] = std::pow(conditioning, t);
  }
  return h;
}

double StochasticQuadratic::value(const Matrix& x) const {
  const Matrix h = curvature();
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += h[i] * x[i] * x[i];
  return 0.5 * s;
}

Matrix StochasticQuadratic::gradient(const Matrix& x) const {
  require_same_shape(x, Matrix(dim, dim), "quadratic point");
  const Matrix h = curvature();
  Matrix g(dim, dim);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = h[i] * x[i];
  return g;
}

Matrix StochasticQuadratic::noisy_gradient(const Matrix& x, Rng& rng) const {
  Matrix g = gradient(x);
  const double per = sigma / std::sqrt(static_cast<double>(g.size()));
  for (std::size_t i = 0; i < g.size(); ++i) g[i] += per * rng.gaussian();
  return g;
}

ModelNormSpec StochasticQuadratic::norm_spec() const {
  ModelNormSpec s;
  LayerNorm L;
  L.weight = NormSpec::matrix(norm, dim, dim);
  L.rho = rho;
  s.layers.push_back(L);
  return s;
}

Matrix StochasticQuadratic::start_point(std::uint64_t seed) const {
  Rng rng(seed);
  Matrix x = gaussian_matrix(dim, dim, rng);
  x *= rho / op_norm(x, NormSpec::matrix(norm, dim, dim));
  return x;
}

// ---- SyntheticClassification ---------------------------------------------------

void SyntheticClassification::validate() const {
  if (dim < 1) throw std::invalid_argument("synthetic dim must be >= 1");
  if (classes < 2) throw std::invalid_argument("synthetic classes must be >= 2");
  if (clusters < 1) throw std::invalid_argument("synthetic clusters must be >= 1");
  if (!(noise >= 0.0) || !std::isfinite(noise)) throw std::invalid_argument("synthetic noise must be >= 0");
  if (n_train < 1) throw std::invalid_argument("synthetic n_train must be >= 1");
}

namespace {

Batch draw_samples(const Matrix& centers, std::size_t clusters, double noise, std::size_t n,
                   std::size_t classes, Rng& rng) {
  Batch b;
  b.x = Matrix(n, centers.cols());
  b.targets = Matrix(n, classes);
  b.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = rng.below(centers.rows());
    const std::size_t label = c / clusters;
    auto row = b.x.row(i);
    auto ctr = centers.row(c);
    for (std::size_t j = 0; j < row.size(); ++j) row[j] = ctr[j] + noise * rng.gaussian();
    b.labels[i] = label;
    b.targets(i, label) = 1.0;
  }
  return b;
}

double max_row_rms(const Matrix& x) {
  double m = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) m = std::max(m, vec_norm(x.row(i), VecNorm::RMS));
  return m;
}

}  // namespace

Dataset gen_synthetic(const SyntheticClassification& spec, std::uint64_t seed) {
  spec.validate();
  Rng rc(derive_seed(seed, 0));
  const Matrix centers = gaussian_matrix(spec.classes * spec.clusters, spec.dim, rc);
  Rng rtr(derive_seed(seed, 1));
  Rng rte(derive_seed(seed, 2));
  Dataset d;
  d.classes = spec.classes;
  d.train = draw_samples(centers, spec.clusters, spec.noise, spec.n_train, spec.classes, rtr);
  if (spec.n_test > 0) d.test = draw_samples(centers, spec.clusters, spec.noise, spec.n_test, spec.classes, rte);
  double m = max_row_rms(d.train.x);
  if (!d.test.x.empty()) m = std::max(m, max_row_rms(d.test.x));
  if (m > 1.0) {
    d.train.x *= 1.0 / m;
    if (!d.test.x.empty()) d.test.x *= 1.0 / m;
  }
  return d;
}

// ---- IDX ----------------------------------------------------------------------

namespace {

class IdxReader {
 public:
  explicit IdxReader(const std::vector<unsigned char>& b) : b_(b) {}

  std::uint32_t u32(const char* field) {
    need(4, field);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = (v << 8) | b_[pos_++];
    return v;
  }

  unsigned char u8() {
    need(1, "data");
    return b_[pos_++];
  }

  void need(std::size_t n, const char* /*field*/) const {
    if (pos_ + n > b_.size()) {
      throw std::runtime_error("unexpected end of file at offset " + std::to_string(b_.size()));
    }
  }

  std::size_t pos() const { return pos_; }

 private:
  const std::vector<unsigned char>& b_;
  std::size_t pos_ = 0;
};

std::string hex32(std::uint32_t v) {
  std::ostringstream s;
  s << "0x" << std::hex;
  s.width(8);
  s.fill('0');
  s << v;
  return s.str();
}

void check_magic(std::uint32_t got, std::uint32_t want) {
  if (got != want) {
    throw std::runtime_error("bad IDX field 'magic': expected " + hex32(want) + ", found " + hex32(got));
  }
}

std::size_t positive_dim(std::uint32_t v, const char* field) {
  if (v == 0) throw std::runtime_error(std::string("bad IDX field '") + field + "': must be positive");
  return v;
}

std::vector<unsigned char> read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

}  // namespace

Matrix parse_idx_images(const std::vector<unsigned char>& bytes) {
  IdxReader r(bytes);
  check_magic(r.u32("magic"), 0x00000803);
  const std::size_t n = positive_dim(r.u32("count"), "count");
  const std::size_t rows = positive_dim(r.u32("rows"), "rows");
  const std::size_t cols = positive_dim(r.u32("cols"), "cols");
  Matrix x(n, rows * cols);
  r.need(x.size(), "data");
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = r.u8() / 255.0;
  return x;
}

std::vector<std::size_t> parse_idx_labels(const std::vector<unsigned char>& bytes) {
  IdxReader r(bytes);
  check_magic(r.u32("magic"), 0x00000801);
  const std::size_t n = positive_dim(r.u32("count"), "count");
  r.need(n, "data");
  std::vector<std::size_t> y(n);
  for (auto& v : y) v = r.u8();
  return y;
}

Matrix load_idx_images(const std::string& path) {
  try {
    return parse_idx_images(read_file(path));
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

std::vector<std::size_t> load_idx_labels(const std::string& path) {
  try {
    return parse_idx_labels(read_file(path));
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

namespace {

Batch make_labeled(Matrix x, std::vector<std::size_t> y, std::size_t classes, const std::string& what) {
  if (x.rows() != y.size()) {
    throw std::runtime_error(what + ": image count " + std::to_string(x.rows()) +
                             " does not match label count " + std::to_string(y.size()));
  }
  Batch b;
  b.targets = Matrix(y.size(), classes);
  for (std::size_t i = 0; i < y.size(); ++i) b.targets(i, y[i]) = 1.0;
  b.x = std::move(x);
  b.labels = std::move(y);
  return b;
}

}  // namespace

Dataset load_idx_dataset(const std::string& train_images, const std::string& train_labels,
                         const std::string& test_images, const std::string& test_labels) {
  Matrix xtr = load_idx_images(train_images);
  auto ytr = load_idx_labels(train_labels);
  Matrix xte;
  std::vector<std::size_t> yte;
  if (!test_images.empty() || !test_labels.empty()) {
    xte = load_idx_images(test_images);
    yte = load_idx_labels(test_labels);
    if (xte.cols() != xtr.cols()) throw std::runtime_error("test images differ in size from train images");
  }
  std::size_t classes = 0;
  for (auto v : ytr) classes = std::max(classes, v + 1);
  for (auto v : yte) classes = std::max(classes, v + 1);
  classes = std::max<std::size_t>(classes, 2);
  Dataset d;
  d.classes = classes;
  d.train = make_labeled(std::move(xtr), std::move(ytr), classes, "train");
  if (!xte.empty()) d.test = make_labeled(std::move(xte), std::move(yte), classes, "test");
  return d;
}

// ---- batches ------------------------------------------------------------------------

Batch subset(const Batch& b, const std::vector<std::size_t>& idx) {
  Batch out;
  out.x = Matrix(idx.size(), b.x.cols());
  const bool has_t = !b.targets.empty();
  if (has_t) out.targets = Matrix(idx.size(), b.targets.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    std::copy_n(b.x.row(idx[i]).data(), b.x.cols(), out.x.row(i).data());
    if (has_t) std::copy_n(b.targets.row(idx[i]).data(), b.targets.cols(), out.targets.row(i).data());
    if (!b.labels.empty()) out.labels.push_back(b.labels[idx[i]]);
  }
  return out;
}

Batch sample_batch(const Batch& b, std::size_t count, Rng& rng) {
  std::vector<std::size_t> idx(count);
  for (auto& i : idx) i = rng.below(b.size());
  return subset(b, idx);
}

}  // namespace scion
