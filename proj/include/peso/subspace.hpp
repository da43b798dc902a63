// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "peso/linalg.hpp"
#include "peso/matrix.hpp"

namespace peso::subspace {

using linalg::Matrix;

/// Accumulated baseline W̃ plus the immutable starting point. A shadow sum of
/// every absorbed increment backs the debug-mode consistency check.
struct AnchoredState {
  Matrix w_tilde;
  Matrix origin;
  Matrix absorbed;  // running sum of increments

  static AnchoredState from_origin(Matrix w0);
  bool shadow_consistent(double tol = 1e-9) const;
};

/// w_tilde += increment, shadow accumulator maintained alongside.
void absorb(AnchoredState& anchored, const Matrix& increment);

/// Low-rank adapter factors; the realized increment is a·b.
struct AdapterPair {
  Matrix a;  // m×r
  Matrix b;  // r×n
  double gamma = 1.0;

  std::size_t rank() const { return a.cols(); }
};

Matrix realized(const AdapterPair& adapter);

/// SVD-style parameterization: the realized increment is u·diag(xi)·v.
struct SpectralAdapter {
  Matrix u;                // m×r
  std::vector<double> xi;  // r
  Matrix v;                // r×n
};

Matrix realized(const SpectralAdapter& adapter);

/// Left-projection subspace: p has orthonormal columns.
struct ProjectedSubspace {
  Matrix p;  // m×r
};

struct SmoothingConfig {
  double tau1 = 0.9;  // EMA weight for bases
  double tau2 = 0.9;  // EMA weight for the core scaling
};

/// Projection of g onto {u·C·v : C arbitrary}: u·uᵀ·g·vᵀ·v. Requires u with
/// orthonormal columns and v with orthonormal rows.
Matrix project_svd_subspace(const Matrix& g, const Matrix& u, const Matrix& v,
                            const linalg::Tolerances& tol = {});

/// δ = ‖g − projection‖_F, the distance from the gradient to the subspace.
double subspace_distance(const Matrix& g, const Matrix& projection);

struct RestartedAdapters {
  AdapterPair adapter;
  bool degenerate = false;  // zero gradient, nothing to explore
};

/// Adapter reassignment from the top-r SVD of −g, scaled so that
/// a·b = −(1/γ)·(rank-r truncation of g): a projected gradient step with
/// step size 1/γ.
RestartedAdapters restart_adapters_from_gradient(const Matrix& g, std::size_t r, double gamma);

struct MuonIncrement {
  Matrix increment;
  bool degenerate = false;
};

/// Spectrum-flattened variant: returns −η·U_r·V_r with unit singular values.
MuonIncrement muon_style_restart(const Matrix& g, std::size_t r, double eta);

struct SmoothedRestart {
  AdapterPair adapter;
  Matrix t_a;  // Q_Aᵀ·U_ema, momentum rotation for the left factor
  Matrix t_b;  // Q_Bᵀ·V_ema, momentum rotation for the right factor
  Matrix u_ema;  // m×r blended left basis (not orthonormal in general)
  Matrix v_ema;  // n×r blended right basis
  std::vector<double> core_sigma;  // spectrum of the refactored core
  bool fell_back = false;       // zero adapter, plain restart taken instead
  bool rank_deficient = false;  // a QR or core factor lost rank along the way
};

/// Restart smoothing pipeline: thin QR of the old factors, top-r SVD of −g,
/// Procrustes alignment of the new bases onto the old ones, EMA of bases,
/// core blend, and refactorization with a balanced split.
SmoothedRestart smooth_restart(const AdapterPair& adapter, const Matrix& g,
                               const SmoothingConfig& cfg);

/// Projected subspace descent update: w − η·p·pᵀ·g, computed as the subspace
/// gradient pᵀ·g followed by the write-back.
Matrix galore_step(const Matrix& w, const Matrix& g, const ProjectedSubspace& p, double eta);

}  // namespace peso::subspace
