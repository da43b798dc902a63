// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <initializer_list>
#include <iosfwd>
#include <string>
#include <vector>

namespace peso::linalg {

/// Dense row-major matrix of doubles. The universal tensor of the library:
/// weights, gradients, adapter factors and optimizer moments are all Matrix.
class Matrix {
public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);

  static Matrix identity(std::size_t n);
  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::vector<double>& values() noexcept { return data_; }
  const std::vector<double>& values() const noexcept { return data_; }

  bool same_shape(const Matrix& other) const noexcept {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator*(const Matrix& a, const Matrix& b);  // matrix product
Matrix operator*(double s, const Matrix& a);
Matrix& operator+=(Matrix& a, const Matrix& b);
Matrix& operator-=(Matrix& a, const Matrix& b);

Matrix transpose(const Matrix& a);
Matrix hadamard(const Matrix& a, const Matrix& b);
double dot(const Matrix& a, const Matrix& b);  // Frobenius inner product
double frobenius_norm(const Matrix& a);
double max_abs(const Matrix& a);
bool all_finite(const Matrix& a);

Matrix column(const Matrix& a, std::size_t j);  // m×1 slice
Matrix row(const Matrix& a, std::size_t i);     // 1×n slice

/// CSV form used by fixtures: first line `rows,cols`, then one line per row,
/// values printed with 17 significant digits so parsing is lossless.
void write_matrix_csv(const Matrix& a, std::ostream& os);
void write_matrix_csv(const Matrix& a, const std::string& path);
Matrix read_matrix_csv(std::istream& is);
Matrix read_matrix_csv(const std::string& path);

}  // namespace peso::linalg
