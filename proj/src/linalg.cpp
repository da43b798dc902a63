// SPDX-License-Identifier: Apache-2.0

#include "peso/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace peso::linalg {

namespace {

constexpr double kJacobiEps = 1e-15;
constexpr int kJacobiMaxSweeps = 64;
// Columns whose norm falls below this fraction of the largest column are
// numerically null: they stop participating in rotations (their relative
// coupling to live columns never contracts) and report an exact zero
// singular value with a completed basis direction.
constexpr double kJacobiNullRel = 1e-14;

double col_dot(const std::vector<std::vector<double>>& cols, std::size_t p, std::size_t q) {
  const auto& cp = cols[p];
  const auto& cq = cols[q];
  double s = 0.0;
  for (std::size_t i = 0; i < cp.size(); ++i) s += cp[i] * cq[i];
  return s;
}

double vec_norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// Deterministic completion: the canonical vector with the largest component
// outside span(cols[0..used)), re-orthogonalized twice and normalized. The
// best candidate always has residual at least sqrt((dim-used)/dim); ties take
// the lowest index.
std::vector<double> completion_direction(const std::vector<std::vector<double>>& cols,
                                         std::size_t used, std::size_t dim) {
  if (used >= dim) throw std::logic_error("completion_direction: basis already complete");
  std::size_t best = 0;
  double best_norm = -1.0;
  for (std::size_t cand = 0; cand < dim; ++cand) {
    std::vector<double> v(dim, 0.0);
    v[cand] = 1.0;
    for (std::size_t i = 0; i < used; ++i) {
      double h = 0.0;
      for (std::size_t k = 0; k < dim; ++k) h += cols[i][k] * v[k];
      for (std::size_t k = 0; k < dim; ++k) v[k] -= h * cols[i][k];
    }
    const double nv = vec_norm(v);
    if (nv > best_norm) {
      best_norm = nv;
      best = cand;
    }
  }
  std::vector<double> v(dim, 0.0);
  v[best] = 1.0;
  for (int pass = 0; pass < 2; ++pass) {
    for (std::size_t i = 0; i < used; ++i) {
      double h = 0.0;
      for (std::size_t k = 0; k < dim; ++k) h += cols[i][k] * v[k];
      for (std::size_t k = 0; k < dim; ++k) v[k] -= h * cols[i][k];
    }
  }
  const double nv = vec_norm(v);
  for (double& x : v) x /= nv;
  return v;
}

struct JacobiOut {
  std::vector<std::vector<double>> u_cols;  // m-vectors, k of them
  std::vector<double> sigma;                // k
  std::vector<std::vector<double>> v_cols;  // n-vectors, k of them (right vectors)
};

// One-sided Jacobi on a tall matrix (m ≥ n): orthogonalizes the columns of a
// working copy by plane rotations accumulated into V, then reads off
// sigma_j = ‖b_j‖ and u_j = b_j / sigma_j. Zero columns get deterministically
// completed u directions.
JacobiOut one_sided_jacobi_tall(const Matrix& a, const Tolerances&) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();

  std::vector<std::vector<double>> b(n, std::vector<double>(m));
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < m; ++i) b[j][i] = a(i, j);

  std::vector<std::vector<double>> v(n, std::vector<double>(n, 0.0));
  for (std::size_t j = 0; j < n; ++j) v[j][j] = 1.0;

  bool converged = (n <= 1);
  double worst = 0.0;
  for (int sweep = 0; sweep < kJacobiMaxSweeps && !converged; ++sweep) {
    std::size_t rotations = 0;
    worst = 0.0;
    double scale_sq = 0.0;
    for (std::size_t j = 0; j < n; ++j) scale_sq = std::max(scale_sq, col_dot(b, j, j));
    const double drop_sq = kJacobiNullRel * kJacobiNullRel * scale_sq;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double alpha = col_dot(b, p, p);
        const double beta = col_dot(b, q, q);
        if (alpha <= drop_sq || beta <= drop_sq) continue;
        const double gamma = col_dot(b, p, q);
        const double rel = std::abs(gamma) / std::sqrt(alpha * beta);
        worst = std::max(worst, rel);
        if (rel <= kJacobiEps) continue;
        ++rotations;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < m; ++i) {
          const double bp = b[p][i], bq = b[q][i];
          b[p][i] = c * bp - s * bq;
          b[q][i] = s * bp + c * bq;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double vp = v[p][i], vq = v[q][i];
          v[p][i] = c * vp - s * vq;
          v[q][i] = s * vp + c * vq;
        }
      }
    }
    converged = (rotations == 0);
  }
  if (!converged) {
    std::ostringstream os;
    os << "svd: one-sided Jacobi did not converge in " << kJacobiMaxSweeps
       << " sweeps (worst relative coupling " << worst << ")";
    throw convergence_error(os.str(), worst);
  }

  std::vector<double> sigma(n);
  double sigma_max = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    sigma[j] = vec_norm(b[j]);
    sigma_max = std::max(sigma_max, sigma[j]);
  }
  // Null columns report an exact zero.
  const double null_cut = kJacobiNullRel * sigma_max;
  for (std::size_t j = 0; j < n; ++j)
    if (sigma[j] <= null_cut) sigma[j] = 0.0;

  // Non-increasing order; stable so equal values keep the sweep output order.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return sigma[x] > sigma[y]; });

  JacobiOut out;
  out.sigma.resize(n);
  out.u_cols.resize(n);
  out.v_cols.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t src = order[j];
    out.sigma[j] = sigma[src];
    out.v_cols[j] = v[src];
    if (sigma[src] > 0.0) {
      out.u_cols[j] = b[src];
      for (double& x : out.u_cols[j]) x /= sigma[src];
    } else {
      out.u_cols[j] = completion_direction(out.u_cols, j, m);
    }
  }
  return out;
}

SvdFactors assemble(const std::vector<std::vector<double>>& u_cols, std::vector<double> sigma,
                    const std::vector<std::vector<double>>& v_cols, std::size_t m, std::size_t n) {
  const std::size_t k = sigma.size();
  SvdFactors f;
  f.u = Matrix(m, k);
  f.vt = Matrix(k, n);
  f.sigma = std::move(sigma);
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t i = 0; i < m; ++i) f.u(i, j) = u_cols[j][i];
    for (std::size_t i = 0; i < n; ++i) f.vt(j, i) = v_cols[j][i];
  }
  // Sign convention: largest-magnitude entry of each left singular vector is
  // positive (first occurrence wins), keeping bases reproducible across runs.
  for (std::size_t j = 0; j < k; ++j) {
    std::size_t imax = 0;
    double best = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double mag = std::abs(f.u(i, j));
      if (mag > best) {
        best = mag;
        imax = i;
      }
    }
    if (f.u(imax, j) < 0.0) {
      for (std::size_t i = 0; i < m; ++i) f.u(i, j) = -f.u(i, j);
      for (std::size_t i = 0; i < n; ++i) f.vt(j, i) = -f.vt(j, i);
    }
  }
  return f;
}

}  // namespace

QrResult qr_thin(const Matrix& a, const Tolerances& tol) {
  const std::size_t m = a.rows();
  const std::size_t r = a.cols();
  if (a.empty()) throw std::invalid_argument("qr_thin: empty matrix");
  if (m < r) throw std::invalid_argument("qr_thin: need rows >= cols");
  if (!all_finite(a)) throw std::invalid_argument("qr_thin: non-finite input");

  QrResult out;
  out.q = Matrix(m, r);
  out.r = Matrix(r, r);

  std::vector<std::vector<double>> q_cols;
  q_cols.reserve(r);
  for (std::size_t j = 0; j < r; ++j) {
    std::vector<double> v(m);
    for (std::size_t i = 0; i < m; ++i) v[i] = a(i, j);
    const double orig = vec_norm(v);
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t i = 0; i < j; ++i) {
        double h = 0.0;
        for (std::size_t kidx = 0; kidx < m; ++kidx) h += q_cols[i][kidx] * v[kidx];
        out.r(i, j) += h;
        for (std::size_t kidx = 0; kidx < m; ++kidx) v[kidx] -= h * q_cols[i][kidx];
      }
    }
    const double nv = vec_norm(v);
    if (nv <= tol.rank * orig) {
      out.rank_deficient = true;
      v = completion_direction(q_cols, j, m);
      out.r(j, j) = 0.0;
    } else {
      out.r(j, j) = nv;
      for (double& x : v) x /= nv;
    }
    q_cols.push_back(std::move(v));
  }
  for (std::size_t j = 0; j < r; ++j)
    for (std::size_t i = 0; i < m; ++i) out.q(i, j) = q_cols[j][i];
  return out;
}

SvdFactors svd_full(const Matrix& a, const Tolerances& tol) {
  if (a.empty()) throw std::invalid_argument("svd_full: empty matrix");
  if (!all_finite(a)) throw std::invalid_argument("svd_full: non-finite input");
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  if (m >= n) {
    JacobiOut j = one_sided_jacobi_tall(a, tol);
    return assemble(j.u_cols, std::move(j.sigma), j.v_cols, m, n);
  }
  // Wide case: decompose the transpose and swap the roles of the factors.
  JacobiOut j = one_sided_jacobi_tall(transpose(a), tol);
  return assemble(j.v_cols, std::move(j.sigma), j.u_cols, m, n);
}

SvdFactors svd_top_r(const Matrix& a, std::size_t r, const Tolerances& tol) {
  const std::size_t p = std::min(a.rows(), a.cols());
  if (r == 0 || r > p)
    throw std::invalid_argument("svd_top_r: rank must be in [1, min(m,n)], got " +
                                std::to_string(r));
  SvdFactors f = svd_full(a, tol);
  if (r == p) return f;
  SvdFactors t;
  t.sigma.assign(f.sigma.begin(), f.sigma.begin() + static_cast<std::ptrdiff_t>(r));
  t.u = Matrix(a.rows(), r);
  t.vt = Matrix(r, a.cols());
  for (std::size_t j = 0; j < r; ++j) {
    for (std::size_t i = 0; i < a.rows(); ++i) t.u(i, j) = f.u(i, j);
    for (std::size_t i = 0; i < a.cols(); ++i) t.vt(j, i) = f.vt(j, i);
  }
  return t;
}

Matrix svd_reconstruct(const SvdFactors& f) {
  Matrix scaled = f.u;  // columns scaled by sigma
  for (std::size_t j = 0; j < scaled.cols(); ++j)
    for (std::size_t i = 0; i < scaled.rows(); ++i) scaled(i, j) *= f.sigma[j];
  return scaled * f.vt;
}

ProcrustesResult orthogonal_procrustes(const Matrix& source, const Matrix& target,
                                       const Tolerances& tol) {
  if (!source.same_shape(target))
    throw std::invalid_argument("orthogonal_procrustes: shape mismatch");
  const Matrix eye = Matrix::identity(source.cols());
  if (max_abs(transpose(source) * source - eye) > tol.orthogonality)
    throw std::invalid_argument("orthogonal_procrustes: source columns not orthonormal");
  if (max_abs(transpose(target) * target - eye) > tol.orthogonality)
    throw std::invalid_argument("orthogonal_procrustes: target columns not orthonormal");

  const Matrix cross = transpose(target) * source;
  SvdFactors f = svd_full(cross, tol);
  ProcrustesResult out;
  out.r_align = f.u * f.vt;
  // Orthonormal inputs give sigma ≤ 1; a vanishing value means the cross
  // product does not constrain that direction.
  out.rank_deficient = f.sigma.empty() || f.sigma.back() <= tol.rank;
  return out;
}

PolarFactors polar_refactor(const Matrix& s, const Tolerances& tol) {
  if (s.rows() != s.cols()) throw std::invalid_argument("polar_refactor: core must be square");
  SvdFactors f = svd_full(s, tol);
  PolarFactors out;
  out.r_l = std::move(f.u);
  out.sigma = std::move(f.sigma);
  out.r_r = transpose(f.vt);
  return out;
}

double rms_norm(const Matrix& a) {
  if (a.empty()) throw std::invalid_argument("rms_norm: empty matrix");
  return frobenius_norm(a) / std::sqrt(static_cast<double>(a.size()));
}

}  // namespace peso::linalg
