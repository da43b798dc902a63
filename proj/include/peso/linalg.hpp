// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "peso/matrix.hpp"

namespace peso::linalg {

/// Central tolerance table. Every factorization contract in this module is
/// stated against these bounds; callers may pass an adjusted copy.
struct Tolerances {
  double orthogonality = 1e-8;    // admission bound for orthonormal inputs
  double reconstruction = 1e-10;  // factorization residual bound
  double rank = 1e-12;            // relative cutoff below which a direction counts as zero
};

/// Thrown when an iterative factorization fails to converge within its sweep
/// cap; `residual` carries the worst remaining off-diagonal coupling.
struct convergence_error : std::runtime_error {
  convergence_error(const std::string& what, double residual_)
      : std::runtime_error(what), residual(residual_) {}
  double residual;
};

struct QrResult {
  Matrix q;  // m×r, orthonormal columns
  Matrix r;  // r×r upper-triangular, non-negative diagonal
  bool rank_deficient = false;
};

/// Thin QR of an m×r matrix (m ≥ r) by modified Gram–Schmidt with a second
/// re-orthogonalization pass. Dependent columns are replaced by
/// re-orthogonalized canonical vectors, their r diagonal is set to exactly 0,
/// and the result is flagged rank_deficient.
QrResult qr_thin(const Matrix& a, const Tolerances& tol = {});

struct SvdFactors {
  Matrix u;                   // m×k, orthonormal columns
  std::vector<double> sigma;  // k values, non-increasing, all ≥ 0
  Matrix vt;                  // k×n, orthonormal rows
};

/// Full SVD (k = min(m,n)) by one-sided Jacobi. Deterministic: no pivot
/// randomization, ties keep the sweep output order, and every left singular
/// vector is sign-fixed so its largest-magnitude entry is positive.
SvdFactors svd_full(const Matrix& a, const Tolerances& tol = {});

/// Leading-r factors of svd_full; the reconstruction is the Frobenius-optimal
/// rank-r approximation (Eckart–Young).
SvdFactors svd_top_r(const Matrix& a, std::size_t r, const Tolerances& tol = {});

Matrix svd_reconstruct(const SvdFactors& f);

struct ProcrustesResult {
  Matrix r_align;  // r×r, orthogonal
  bool rank_deficient = false;
};

/// Orthogonal Procrustes alignment between two matrices with orthonormal
/// columns: r_align = P·Qᵀ from the SVD of targetᵀ·source, so that
/// source·r_alignᵀ minimizes ‖source·R − target‖_F over orthogonal R.
/// A rank-deficient cross product is flagged; its null directions are paired
/// in the order of the deterministic SVD completion.
ProcrustesResult orthogonal_procrustes(const Matrix& source, const Matrix& target,
                                       const Tolerances& tol = {});

struct PolarFactors {
  Matrix r_l;                 // r×r orthogonal
  std::vector<double> sigma;  // r non-negative values
  Matrix r_r;                 // r×r orthogonal; s = r_l·diag(sigma)·r_rᵀ
};

/// Refactorization of a square core as r_l·diag(sigma)·r_rᵀ via the SVD.
PolarFactors polar_refactor(const Matrix& s, const Tolerances& tol = {});

/// Root-mean-square of the entries: ‖a‖_F / sqrt(rows·cols).
double rms_norm(const Matrix& a);

}  // namespace peso::linalg
