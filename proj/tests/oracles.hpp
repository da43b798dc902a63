// SPDX-License-Identifier: Apache-2.0
//
// Test-only oracles, kept independent of the implementation paths they check:
// classical Gram-Schmidt QR, a two-sided Jacobi eigensolver for AᵀA, central
// finite differences, a scalar AdamW reference, and seeded random matrices.
#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "peso/matrix.hpp"

namespace oracles {

using peso::linalg::Matrix;

inline Matrix random_matrix(std::mt19937_64& gen, std::size_t rows, std::size_t cols,
                            double scale = 1.0) {
  std::normal_distribution<double> dist(0.0, scale);
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < m.size(); ++i) m.values()[i] = dist(gen);
  return m;
}

struct GramSchmidtQr {
  Matrix q;
  Matrix r;
};

// Brute-force classical Gram-Schmidt (no re-orthogonalization, no pivoting).
inline GramSchmidtQr gram_schmidt_qr(const Matrix& a) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  GramSchmidtQr out{Matrix(m, n), Matrix(n, n)};
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<double> v(m);
    for (std::size_t i = 0; i < m; ++i) v[i] = a(i, j);
    for (std::size_t p = 0; p < j; ++p) {
      double h = 0.0;
      for (std::size_t i = 0; i < m; ++i) h += out.q(i, p) * a(i, j);
      out.r(p, j) = h;
      for (std::size_t i = 0; i < m; ++i) v[i] -= h * out.q(i, p);
    }
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    out.r(j, j) = norm;
    for (std::size_t i = 0; i < m; ++i) out.q(i, j) = v[i] / norm;
  }
  return out;
}

// Two-sided Jacobi eigensolver for a symmetric matrix; returns eigenvalues in
// non-increasing order. Independent of the one-sided SVD sweep.
inline std::vector<double> jacobi_eigenvalues(Matrix s) {
  const std::size_t n = s.rows();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += s(p, q) * s(p, q);
    if (off < 1e-26) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (s(p, q) == 0.0) continue;
        const double theta = (s(q, q) - s(p, p)) / (2.0 * s(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double sn = t * c;
        for (std::size_t i = 0; i < n; ++i) {
          const double sip = s(i, p), siq = s(i, q);
          s(i, p) = c * sip - sn * siq;
          s(i, q) = sn * sip + c * siq;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double spi = s(p, i), sqi = s(q, i);
          s(p, i) = c * spi - sn * sqi;
          s(q, i) = sn * spi + c * sqi;
        }
      }
    }
  }
  std::vector<double> eig(n);
  for (std::size_t i = 0; i < n; ++i) eig[i] = s(i, i);
  std::sort(eig.begin(), eig.end(), std::greater<double>());
  return eig;
}

// Central finite differences over every entry.
inline Matrix finite_difference(const std::function<double(const Matrix&)>& f, Matrix x,
                                double h = 1e-5) {
  Matrix g(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x.values()[i];
    x.values()[i] = saved + h;
    const double up = f(x);
    x.values()[i] = saved - h;
    const double down = f(x);
    x.values()[i] = saved;
    g.values()[i] = (up - down) / (2.0 * h);
  }
  return g;
}

inline double rel_error(const Matrix& computed, const Matrix& reference) {
  const double denom = std::max(peso::linalg::frobenius_norm(reference), 1e-12);
  return peso::linalg::frobenius_norm(computed - reference) / denom;
}

// Scalar AdamW reference written straight from the update formulas.
struct ScalarAdamRef {
  double m = 0.0, v = 0.0;
  long t = 0;
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8, weight_decay = 0.0;

  double step(double param, double grad, double lr) {
    ++t;
    m = beta1 * m + (1.0 - beta1) * grad;
    v = beta2 * v + (1.0 - beta2) * grad * grad;
    const double m_hat = m / (1.0 - std::pow(beta1, t));
    const double v_hat = v / (1.0 - std::pow(beta2, t));
    return param - lr * weight_decay * param - lr * m_hat / (std::sqrt(v_hat) + eps);
  }
};

}  // namespace oracles
