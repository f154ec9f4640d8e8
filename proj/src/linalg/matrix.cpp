// SPDX-License-Identifier: Apache-2.0
#include "scion/linalg/matrix.hpp"

#include <cmath>
#include <stdexcept>

#include "scion/linalg/kernels.hpp"

namespace scion {

namespace {

void require_finite(std::span<const double> values) {
  for (double v : values) {
    if (!std::isfinite(v)) throw std::invalid_argument("matrix entries must be finite");
  }
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {
  if (rows == 0 || cols == 0) throw std::invalid_argument("matrix dimensions must be positive");
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  if (rows.size() == 0 || rows.begin()->size() == 0) {
    throw std::invalid_argument("matrix dimensions must be positive");
  }
  Matrix m(rows.size(), rows.begin()->size());
  std::size_t i = 0;
  for (const auto& r : rows) {
    if (r.size() != m.cols_) throw std::invalid_argument("ragged rows in matrix literal");
    std::size_t j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  require_finite(m.data_);
  return m;
}

Matrix Matrix::from_data(std::size_t rows, std::size_t cols, std::vector<double> data) {
  if (data.size() != rows * cols) {
    throw std::invalid_argument("data length " + std::to_string(data.size()) +
                                " does not match " + std::to_string(rows) + "x" +
                                std::to_string(cols));
  }
  require_finite(data);
  Matrix m(rows, cols);
  m.data_ = std::move(data);
  return m;
}

Matrix Matrix::from_vector(std::span<const double> values) {
  return from_data(values.size(), 1, std::vector<double>(values.begin(), values.end()));
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

std::vector<double> Matrix::column(std::size_t j) const {
  std::vector<double> out(rows_);
  for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
  return out;
}

void Matrix::set_column(std::size_t j, std::span<const double> values) {
  if (values.size() != rows_) throw std::invalid_argument("set_column: length mismatch");
  for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = values[i];
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  }
  return t;
}

void Matrix::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

Matrix& Matrix::operator+=(const Matrix& o) {
  require_same_shape(*this, o, "matrix +=");
  kernels::active().axpy(1.0, o.data(), data(), size());
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& o) {
  require_same_shape(*this, o, "matrix -=");
  kernels::active().axpy(-1.0, o.data(), data(), size());
  return *this;
}

Matrix& Matrix::operator*=(double a) {
  kernels::active().scale(a, data(), size());
  return *this;
}

std::string Matrix::shape_string() const {
  return std::to_string(rows_) + "x" + std::to_string(cols_);
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator*(double s, Matrix a) { return a *= s; }
Matrix operator*(Matrix a, double s) { return a *= s; }

void axpy(double a, const Matrix& x, Matrix& y) {
  require_same_shape(x, y, "axpy");
  kernels::active().axpy(a, x.data(), y.data(), x.size());
}

void axpby(double a, const Matrix& x, double b, Matrix& y) {
  require_same_shape(x, y, "axpby");
  kernels::active().axpby(a, x.data(), b, y.data(), x.size());
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw std::invalid_argument("matmul: " + a.shape_string() + " * " + b.shape_string());
  }
  Matrix c(a.rows(), b.cols());
  kernels::active().gemm_nn(a.rows(), b.cols(), a.cols(), a.data(), b.data(), c.data());
  return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) {
    throw std::invalid_argument("matmul_nt: " + a.shape_string() + " * (" + b.shape_string() +
                                ")^T");
  }
  Matrix c(a.rows(), b.rows());
  kernels::active().gemm_nt(a.rows(), b.rows(), a.cols(), a.data(), b.data(), c.data());
  return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) {
    throw std::invalid_argument("matmul_tn: (" + a.shape_string() + ")^T * " + b.shape_string());
  }
  Matrix c(a.cols(), b.cols());
  kernels::active().gemm_tn(a.cols(), b.cols(), a.rows(), a.data(), b.data(), c.data());
  return c;
}

double inner(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "inner");
  return kernels::active().dot(a.data(), b.data(), a.size());
}

double frobenius_norm(const Matrix& a) {
  // Rescale by the largest entry so huge or tiny inputs neither overflow nor underflow.
  const double m = max_abs(a);
  if (m == 0.0 || !std::isfinite(m)) return m;
  if (m > 1e-100 && m < 1e100) return std::sqrt(kernels::active().sum_squares(a.data(), a.size()));
  Matrix scaled = a * (1.0 / m);
  return m * std::sqrt(kernels::active().sum_squares(scaled.data(), scaled.size()));
}

double max_abs(const Matrix& a) { return kernels::active().max_abs(a.data(), a.size()); }

bool all_finite(const Matrix& a) {
  for (double v : a.values()) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

bool is_zero(const Matrix& a) {
  for (double v : a.values()) {
    if (v != 0.0) return false;
  }
  return true;
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (!a.same_shape(b)) {
    throw std::invalid_argument(std::string(what) + ": shape mismatch " + a.shape_string() +
                                " vs " + b.shape_string());
  }
}

ParamList zeros_like(const ParamList& params) {
  ParamList out;
  out.reserve(params.size());
  for (const auto& p : params) out.push_back(Matrix::zeros_like(p));
  return out;
}

double inner(const ParamList& a, const ParamList& b) {
  require_same_shapes(a, b, "inner");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += inner(a[i], b[i]);
  return s;
}

void require_same_shapes(const ParamList& a, const ParamList& b, const char* what) {
  if (a.size() != b.size()) {
    throw std::invalid_argument(std::string(what) + ": parameter count mismatch " +
                                std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
  for (std::size_t i = 0; i < a.size(); ++i) require_same_shape(a[i], b[i], what);
}

}  // namespace scion
