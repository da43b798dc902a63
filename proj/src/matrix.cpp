// SPDX-License-Identifier: Apache-2.0

#include "peso/matrix.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace peso::linalg {

namespace {

[[noreturn]] void shape_error(const char* op, const Matrix& a, const Matrix& b) {
  std::ostringstream os;
  os << "matrix " << op << ": shape mismatch (" << a.rows() << "x" << a.cols() << " vs "
     << b.rows() << "x" << b.cols() << ")";
  throw std::invalid_argument(os.str());
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {
  if (rows == 0 || cols == 0) throw std::invalid_argument("matrix dimensions must be positive");
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  if (r == 0) throw std::invalid_argument("from_rows: empty initializer");
  const std::size_t c = rows.begin()->size();
  Matrix m(r, c);
  std::size_t i = 0;
  for (const auto& rr : rows) {
    if (rr.size() != c) throw std::invalid_argument("from_rows: ragged rows");
    std::size_t j = 0;
    for (double v : rr) m(i, j++) = v;
    ++i;
  }
  return m;
}

Matrix operator+(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) shape_error("add", a, b);
  Matrix out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out.values()[i] += b.values()[i];
  return out;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) shape_error("subtract", a, b);
  Matrix out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out.values()[i] -= b.values()[i];
  return out;
}

Matrix& operator+=(Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) shape_error("add", a, b);
  for (std::size_t i = 0; i < a.size(); ++i) a.values()[i] += b.values()[i];
  return a;
}

Matrix& operator-=(Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) shape_error("subtract", a, b);
  for (std::size_t i = 0; i < a.size(); ++i) a.values()[i] -= b.values()[i];
  return a;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) shape_error("multiply", a, b);
  Matrix out(a.rows(), b.cols());
  // ikj order keeps the inner loop contiguous for row-major storage
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  }
  return out;
}

Matrix operator*(double s, const Matrix& a) {
  Matrix out = a;
  for (double& v : out.values()) v *= s;
  return out;
}

Matrix transpose(const Matrix& a) {
  Matrix out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) shape_error("hadamard", a, b);
  Matrix out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out.values()[i] *= b.values()[i];
  return out;
}

double dot(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) shape_error("dot", a, b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a.values()[i] * b.values()[i];
  return s;
}

double frobenius_norm(const Matrix& a) {
  double s = 0.0;
  for (double v : a.values()) s += v * v;
  return std::sqrt(s);
}

double max_abs(const Matrix& a) {
  double s = 0.0;
  for (double v : a.values()) s = std::max(s, std::abs(v));
  return s;
}

bool all_finite(const Matrix& a) {
  for (double v : a.values())
    if (!std::isfinite(v)) return false;
  return true;
}

Matrix column(const Matrix& a, std::size_t j) {
  Matrix out(a.rows(), 1);
  for (std::size_t i = 0; i < a.rows(); ++i) out(i, 0) = a(i, j);
  return out;
}

Matrix row(const Matrix& a, std::size_t i) {
  Matrix out(1, a.cols());
  for (std::size_t j = 0; j < a.cols(); ++j) out(0, j) = a(i, j);
  return out;
}

void write_matrix_csv(const Matrix& a, std::ostream& os) {
  os << a.rows() << "," << a.cols() << "\n";
  os << std::setprecision(17);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      if (j) os << ",";
      os << a(i, j);
    }
    os << "\n";
  }
}

void write_matrix_csv(const Matrix& a, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for write: " + path);
  write_matrix_csv(a, os);
}

Matrix read_matrix_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("matrix csv: missing header");
  std::size_t rows = 0, cols = 0;
  {
    std::istringstream hs(line);
    char comma = 0;
    if (!(hs >> rows >> comma >> cols) || comma != ',')
      throw std::runtime_error("matrix csv: bad header '" + line + "'");
  }
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    if (!std::getline(is, line)) throw std::runtime_error("matrix csv: truncated data");
    std::istringstream ls(line);
    std::string cell;
    for (std::size_t j = 0; j < cols; ++j) {
      if (!std::getline(ls, cell, ',')) throw std::runtime_error("matrix csv: short row");
      m(i, j) = std::strtod(cell.c_str(), nullptr);
    }
  }
  return m;
}

Matrix read_matrix_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open for read: " + path);
  return read_matrix_csv(is);
}

}  // namespace peso::linalg
