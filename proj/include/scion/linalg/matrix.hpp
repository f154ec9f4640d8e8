// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace scion {

/// Dense row-major matrix of doubles. Vectors are stored as d x 1 columns.
///
/// Construction from user-supplied values (from_rows, from_vector) rejects
/// non-finite entries; arithmetic results are not re-checked.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);

  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static Matrix from_data(std::size_t rows, std::size_t cols, std::vector<double> data);
  /// Column vector (n x 1).
  static Matrix from_vector(std::span<const double> values);
  static Matrix identity(std::size_t n);
  static Matrix zeros_like(const Matrix& other) { return Matrix(other.rows_, other.cols_); }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }
  bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  double& operator[](std::size_t idx) { return data_[idx]; }
  double operator[](std::size_t idx) const { return data_[idx]; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  std::vector<double> column(std::size_t j) const;
  void set_column(std::size_t j, std::span<const double> values);

  Matrix transpose() const;
  void fill(double v);

  Matrix& operator+=(const Matrix& o);
  Matrix& operator-=(const Matrix& o);
  Matrix& operator*=(double a);

  bool operator==(const Matrix& o) const = default;

  std::string shape_string() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(double s, Matrix a);
Matrix operator*(Matrix a, double s);

/// y += a * x
void axpy(double a, const Matrix& x, Matrix& y);
/// y = a * x + b * y
void axpby(double a, const Matrix& x, double b, Matrix& y);

Matrix matmul(const Matrix& a, const Matrix& b);
/// a * b^T
Matrix matmul_nt(const Matrix& a, const Matrix& b);
/// a^T * b
Matrix matmul_tn(const Matrix& a, const Matrix& b);

/// Frobenius inner product.
double inner(const Matrix& a, const Matrix& b);
double frobenius_norm(const Matrix& a);
double max_abs(const Matrix& a);
bool all_finite(const Matrix& a);
bool is_zero(const Matrix& a);

/// Throws std::invalid_argument naming `what` when shapes differ.
void require_same_shape(const Matrix& a, const Matrix& b, const char* what);

/// Parameters, gradients and directions of a model: one matrix per tensor.
using ParamList = std::vector<Matrix>;

ParamList zeros_like(const ParamList& params);
double inner(const ParamList& a, const ParamList& b);
void require_same_shapes(const ParamList& a, const ParamList& b, const char* what);

}  // namespace scion
