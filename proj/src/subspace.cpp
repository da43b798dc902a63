// SPDX-License-Identifier: Apache-2.0

#include "peso/subspace.hpp"

#include <cmath>
#include <stdexcept>

namespace peso::subspace {

using linalg::svd_top_r;
using linalg::SvdFactors;

AnchoredState AnchoredState::from_origin(Matrix w0) {
  AnchoredState s;
  s.w_tilde = w0;
  s.origin = std::move(w0);
  s.absorbed = Matrix(s.origin.rows(), s.origin.cols());
  return s;
}

bool AnchoredState::shadow_consistent(double tol) const {
  return linalg::frobenius_norm(w_tilde - (origin + absorbed)) <= tol;
}

void absorb(AnchoredState& anchored, const Matrix& increment) {
  if (!anchored.w_tilde.same_shape(increment))
    throw std::invalid_argument("absorb: increment shape mismatch");
  anchored.w_tilde += increment;
  anchored.absorbed += increment;
#ifndef NDEBUG
  if (!anchored.shadow_consistent())
    throw std::logic_error("absorb: anchored state diverged from shadow accumulator");
#endif
}

Matrix realized(const AdapterPair& adapter) { return adapter.a * adapter.b; }

Matrix realized(const SpectralAdapter& adapter) {
  Matrix scaled = adapter.u;
  for (std::size_t j = 0; j < scaled.cols(); ++j)
    for (std::size_t i = 0; i < scaled.rows(); ++i) scaled(i, j) *= adapter.xi[j];
  return scaled * adapter.v;
}

Matrix project_svd_subspace(const Matrix& g, const Matrix& u, const Matrix& v,
                            const linalg::Tolerances& tol) {
  if (u.rows() != g.rows() || v.cols() != g.cols())
    throw std::invalid_argument("project_svd_subspace: factor shapes do not match gradient");
  const Matrix iu = Matrix::identity(u.cols());
  if (linalg::max_abs(transpose(u) * u - iu) > tol.orthogonality)
    throw std::invalid_argument("project_svd_subspace: u columns not orthonormal");
  const Matrix iv = Matrix::identity(v.rows());
  if (linalg::max_abs(v * transpose(v) - iv) > tol.orthogonality)
    throw std::invalid_argument("project_svd_subspace: v rows not orthonormal");
  return u * (transpose(u) * g * transpose(v)) * v;
}

double subspace_distance(const Matrix& g, const Matrix& projection) {
  return linalg::frobenius_norm(g - projection);
}

RestartedAdapters restart_adapters_from_gradient(const Matrix& g, std::size_t r, double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("restart_adapters_from_gradient: gamma must be > 0");
  if (r == 0 || r > std::min(g.rows(), g.cols()))
    throw std::invalid_argument("restart_adapters_from_gradient: rank out of range");
  if (!linalg::all_finite(g))
    throw std::invalid_argument("restart_adapters_from_gradient: non-finite gradient");

  RestartedAdapters out;
  out.adapter.gamma = gamma;
  if (linalg::frobenius_norm(g) == 0.0) {
    out.adapter.a = Matrix(g.rows(), r);
    out.adapter.b = Matrix(r, g.cols());
    out.degenerate = true;
    return out;
  }

  const SvdFactors f = svd_top_r(-1.0 * g, r);
  const double inv_sqrt_gamma = 1.0 / std::sqrt(gamma);
  Matrix a = f.u;
  Matrix b = f.vt;
  for (std::size_t j = 0; j < r; ++j) {
    const double s = std::sqrt(f.sigma[j]);
    for (std::size_t i = 0; i < a.rows(); ++i) a(i, j) *= inv_sqrt_gamma * s;
    for (std::size_t i = 0; i < b.cols(); ++i) b(j, i) *= inv_sqrt_gamma * s;
  }
  out.adapter.a = std::move(a);
  out.adapter.b = std::move(b);
  return out;
}

MuonIncrement muon_style_restart(const Matrix& g, std::size_t r, double eta) {
  if (r == 0 || r > std::min(g.rows(), g.cols()))
    throw std::invalid_argument("muon_style_restart: rank out of range");
  if (!linalg::all_finite(g)) throw std::invalid_argument("muon_style_restart: non-finite gradient");

  MuonIncrement out;
  if (linalg::frobenius_norm(g) == 0.0) {
    out.increment = Matrix(g.rows(), g.cols());
    out.degenerate = true;
    return out;
  }
  SvdFactors f = svd_top_r(g, r);
  // Directions below the numerical rank carry no gradient information; the
  // flattened spectrum must not promote them to full steps.
  const double cutoff = linalg::Tolerances{}.rank * f.sigma.front();
  for (std::size_t j = 0; j < r; ++j) {
    const double unit = f.sigma[j] > cutoff ? 1.0 : 0.0;
    for (std::size_t i = 0; i < f.u.rows(); ++i) f.u(i, j) *= unit;
  }
  out.increment = -eta * (f.u * f.vt);
  return out;
}

SmoothedRestart smooth_restart(const AdapterPair& adapter, const Matrix& g,
                               const SmoothingConfig& cfg) {
  const std::size_t r = adapter.rank();
  SmoothedRestart out;

  if (linalg::frobenius_norm(adapter.a) == 0.0 || linalg::frobenius_norm(adapter.b) == 0.0) {
    // Nothing to smooth against: fall back to the plain reassignment.
    RestartedAdapters plain = restart_adapters_from_gradient(g, r, adapter.gamma);
    out.adapter = std::move(plain.adapter);
    out.t_a = Matrix::identity(r);
    out.t_b = Matrix::identity(r);
    out.fell_back = true;
    SvdFactors f = svd_top_r(-1.0 * g, r);
    out.u_ema = f.u;
    out.v_ema = transpose(f.vt);
    out.core_sigma = f.sigma;
    return out;
  }

  // (1) Extract bases and decouple scaling: A = Q_A R_A, B = R_B Q_Bᵀ.
  const linalg::QrResult qa = linalg::qr_thin(adapter.a);
  const linalg::QrResult qb = linalg::qr_thin(transpose(adapter.b));
  out.rank_deficient = qa.rank_deficient || qb.rank_deficient;

  // (2) Fresh directions from the top-r SVD of −g.
  const SvdFactors f = svd_top_r(-1.0 * g, r);
  const Matrix u_new = f.u;                 // m×r
  const Matrix v_new = transpose(f.vt);     // n×r

  // (3) Rotate the fresh bases onto the old ones.
  const linalg::ProcrustesResult ru = linalg::orthogonal_procrustes(u_new, qa.q);
  const linalg::ProcrustesResult rv = linalg::orthogonal_procrustes(v_new, qb.q);
  out.rank_deficient = out.rank_deficient || ru.rank_deficient || rv.rank_deficient;
  const Matrix u_hat = u_new * transpose(ru.r_align);
  const Matrix v_hat = v_new * transpose(rv.r_align);

  // (4) EMA of bases.
  out.u_ema = cfg.tau1 * qa.q + (1.0 - cfg.tau1) * u_hat;
  out.v_ema = cfg.tau1 * qb.q + (1.0 - cfg.tau1) * v_hat;

  // (5) Blend the core: old adapter content against the new gradient.
  const Matrix product = adapter.a * adapter.b;
  const Matrix core = cfg.tau2 * (transpose(out.u_ema) * product * out.v_ema) -
                      (1.0 - cfg.tau2) * (transpose(out.u_ema) * g * out.v_ema);

  // (6) Refactor and split evenly across the two factors.
  const linalg::PolarFactors pf = linalg::polar_refactor(core);
  out.core_sigma = pf.sigma;
  bool collapsed = false;
  for (double s : pf.sigma) collapsed = collapsed || s == 0.0;
  out.rank_deficient = out.rank_deficient || collapsed;

  Matrix left = pf.r_l;   // r×r
  Matrix right = pf.r_r;  // r×r
  for (std::size_t j = 0; j < r; ++j) {
    const double s = std::sqrt(pf.sigma[j]);
    for (std::size_t i = 0; i < r; ++i) {
      left(i, j) *= s;
      right(i, j) *= s;
    }
  }
  out.adapter.a = out.u_ema * left;
  out.adapter.b = transpose(right) * transpose(out.v_ema);
  out.adapter.gamma = adapter.gamma;

  out.t_a = transpose(qa.q) * out.u_ema;
  out.t_b = transpose(qb.q) * out.v_ema;
  return out;
}

Matrix galore_step(const Matrix& w, const Matrix& g, const ProjectedSubspace& p, double eta) {
  if (!w.same_shape(g)) throw std::invalid_argument("galore_step: gradient shape mismatch");
  if (p.p.rows() != w.rows()) throw std::invalid_argument("galore_step: projector shape mismatch");
  const Matrix subspace_grad = transpose(p.p) * g;  // r×n
  return w - eta * (p.p * subspace_grad);
}

}  // namespace peso::subspace
