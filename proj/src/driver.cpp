// SPDX-License-Identifier: Apache-2.0

#include "peso/driver.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "peso/rng.hpp"

namespace peso::driver {

namespace {

constexpr std::uint64_t kStreamLoraInit = 0x55;

void validate_common(const problems::Objective& objective, const PesoConfig& config) {
  if (config.frequency_k < 1) throw std::invalid_argument("config: frequency K must be >= 1");
  if (config.total_steps < 1) throw std::invalid_argument("config: total_steps must be >= 1");
  if (config.rank < 1 || config.rank > std::min(objective.rows, objective.cols))
    throw std::invalid_argument("config: rank must be in [1, min(m,n)]");
  if (!(config.gamma > 0.0)) throw std::invalid_argument("config: gamma must be > 0");
}

Matrix start_point(const problems::Objective& objective, const Matrix* w0) {
  if (!w0) return Matrix(objective.rows, objective.cols);
  if (w0->rows() != objective.rows || w0->cols() != objective.cols)
    throw std::invalid_argument("w0 shape does not match the objective");
  return *w0;
}

// Solves the small SPD-ish system by Gaussian elimination with partial
// pivoting; `a` is n×n row-major. Used only for diagnostics.
std::vector<double> solve_dense(std::vector<double> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t i = col + 1; i < n; ++i)
      if (std::abs(a[i * n + col]) > std::abs(a[pivot * n + col])) pivot = i;
    if (pivot != col) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a[col * n + j], a[pivot * n + j]);
      std::swap(b[col], b[pivot]);
    }
    const double d = a[col * n + col];
    for (std::size_t i = col + 1; i < n; ++i) {
      const double f = a[i * n + col] / d;
      if (f == 0.0) continue;
      for (std::size_t j = col; j < n; ++j) a[i * n + j] -= f * a[col * n + j];
      b[i] -= f * b[col];
    }
  }
  std::vector<double> x(n, 0.0);
  for (std::size_t ii = n; ii-- > 0;) {
    double s = b[ii];
    for (std::size_t j = ii + 1; j < n; ++j) s -= a[ii * n + j] * x[j];
    x[ii] = s / a[ii * n + ii];
  }
  return x;
}

// Distance from g to span{u_i v_i : i} with the (possibly non-orthonormal)
// rank-1 pairs of a spectral adapter, by least squares on the Gram system.
double spectral_span_distance(const Matrix& g, const subspace::SpectralAdapter& adapter) {
  const std::size_t r = adapter.u.cols();
  const Matrix utu = transpose(adapter.u) * adapter.u;
  const Matrix vvt = adapter.v * transpose(adapter.v);
  const Matrix ugv = transpose(adapter.u) * g * transpose(adapter.v);
  std::vector<double> gram(r * r);
  std::vector<double> rhs(r);
  double scale = 1.0;
  for (std::size_t i = 0; i < r; ++i) scale = std::max(scale, utu(i, i) * vvt(i, i));
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < r; ++j) gram[i * r + j] = utu(i, j) * vvt(i, j);
    gram[i * r + i] += 1e-12 * scale;
    rhs[i] = ugv(i, i);
  }
  const std::vector<double> c = solve_dense(std::move(gram), std::move(rhs));
  Matrix proj(g.rows(), g.cols());
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t a = 0; a < g.rows(); ++a)
      for (std::size_t b = 0; b < g.cols(); ++b)
        proj(a, b) += c[i] * adapter.u(a, i) * adapter.v(i, b);
  return linalg::frobenius_norm(g - proj);
}

}  // namespace

RunResult run_peso_generic(const problems::Objective& objective, const PesoConfig& config,
                           const LoopHooks& hooks) {
  if (config.frequency_k < 1) throw std::invalid_argument("config: frequency K must be >= 1");
  if (config.total_steps < 1) throw std::invalid_argument("config: total_steps must be >= 1");
  if (!hooks.exploit || !hooks.realized)
    throw std::invalid_argument("run_peso_generic: exploit and realized hooks are required");

  RunResult result;
  Matrix w_prev = hooks.realized();
  double loss_prev = objective.value(w_prev);
  long restarts_used = 0;

  auto finish_partial = [&](const std::string& why) -> run_aborted {
    result.final_w = w_prev;
    if (!result.trace.steps.empty()) result.summary = harness::trace_summary(result.trace);
    return run_aborted(why, std::move(result));
  };

  for (long k = 1; k <= config.total_steps; ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    harness::StepRecord rec;
    rec.step = k;
    try {
      const Matrix g_enter = objective.full_grad(w_prev);
      rec.grad_norm = linalg::frobenius_norm(g_enter);

      bool explored = false;
      const bool gate_open = (k - 1) % config.frequency_k == 0;
      const bool budget_left = config.max_restarts < 0 || restarts_used < config.max_restarts;
      if (gate_open && budget_left && hooks.explore) {
        ExploreOutcome outcome = hooks.explore(k, g_enter);
        if (outcome.fired) {
          explored = true;
          ++restarts_used;
          rec.restart = true;
          rec.delta_k = outcome.delta;
          result.restart_steps.push_back(k);
          if (outcome.event) result.restart_events.push_back(*outcome.event);
          if (outcome.snapshot) result.snapshots.push_back(*outcome.snapshot);
        }
      }

      hooks.exploit(k, optim::lr_at(config.inner_lr, k), g_enter, explored);

      Matrix w_now = hooks.realized();
      rec.loss = objective.value(w_now);
      rec.inc_norm = linalg::frobenius_norm(w_now - w_prev);
      rec.descent_violation = rec.loss > loss_prev + 1e-12 * std::max(1.0, std::abs(loss_prev));
      rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

      if (!std::isfinite(rec.loss)) {
        result.trace.steps.push_back(rec);
        std::ostringstream os;
        os << "non-finite loss at step " << k;
        throw finish_partial(os.str());
      }
      result.trace.steps.push_back(rec);
      loss_prev = rec.loss;
      w_prev = std::move(w_now);
    } catch (const run_aborted&) {
      throw;
    } catch (const std::exception& e) {
      std::ostringstream os;
      os << "plugin failure at step " << k << ": " << e.what();
      throw finish_partial(os.str());
    }
  }

  result.final_w = std::move(w_prev);
  result.summary = harness::trace_summary(result.trace);
  return result;
}

// ---------------------------------------------------------------------------
// PESO-LoRA-R

LoraRRunner::LoraRRunner(const problems::Objective& objective, const PesoConfig& config, Matrix w0)
    : objective_(objective),
      config_(config),
      anchored_(subspace::AnchoredState::from_origin(std::move(w0))),
      state_a_(optim::AdamState::for_shape(objective.rows, config.rank, config.adam)),
      state_b_(optim::AdamState::for_shape(config.rank, objective.cols, config.adam)) {
  validate_common(objective, config);
  if (config_.exploration != Exploration::FullGradientRestart &&
      config_.exploration != Exploration::MuonRestart)
    throw std::invalid_argument("peso-lora-r: exploration must be full-gradient-restart or muon");
  adapter_.a = Matrix(objective.rows, config_.rank);
  adapter_.b = Matrix(config_.rank, objective.cols);
  adapter_.gamma = config_.gamma;
}

Matrix LoraRRunner::noisy(const Matrix& g) {
  if (!config_.noise) return g;
  return problems::noisy_grad(g, *config_.noise, ++draw_counter_);
}

double LoraRRunner::restart_eta() {
  if (config_.restart_lr) return optim::lr_at(*config_.restart_lr, restart_ordinal_);
  return 1.0 / config_.gamma;
}

ExploreOutcome LoraRRunner::explore(long k, const Matrix& g_enter) {
  // Gate order per the restart scheme: absorb history, take the gradient at
  // the anchored state (which equals the realized entering point), then
  // reassign the adapters. The smoothing path defers the absorb because its
  // blended adapters retain part of the old product.
  const Matrix old_product = subspace::realized(adapter_);
  const double loss_before = objective_.value(anchored_.w_tilde + old_product);
  const Matrix g_used = noisy(g_enter);
  ++restart_ordinal_;
  const double eta = restart_eta();

  RestartEvent event;
  event.step = k;
  event.loss_before = loss_before;

  Matrix u_basis;    // m×r, orthonormal columns of the injected subspace
  Matrix v_basis_t;  // r×n, orthonormal rows
  std::vector<double> snapshot_sigma;
  bool have_basis = false;

  const bool coordinate_mode = config_.inner_opt == InnerOpt::Sgd;
  basis_u_ = Matrix();
  basis_vt_ = Matrix();

  if (config_.exploration == Exploration::MuonRestart) {
    subspace::absorb(anchored_, old_product);
    const subspace::MuonIncrement mu = subspace::muon_style_restart(g_used, config_.rank, eta);
    event.degenerate = mu.degenerate;
    adapter_.a = Matrix(objective_.rows, config_.rank);
    adapter_.b = Matrix(config_.rank, objective_.cols);
    if (!mu.degenerate) {
      // Split the flattened-spectrum increment into adapter factors so the
      // exploitation steps keep operating on (A, B).
      const linalg::SvdFactors f = linalg::svd_top_r(g_used, config_.rank);
      const double cutoff = linalg::Tolerances{}.rank * f.sigma.front();
      Matrix a = f.u;
      for (std::size_t j = 0; j < a.cols(); ++j) {
        const double s = f.sigma[j] > cutoff ? eta : 0.0;
        for (std::size_t i = 0; i < a.rows(); ++i) a(i, j) *= -s;
      }
      adapter_.a = std::move(a);
      adapter_.b = f.vt;
      u_basis = f.u;
      v_basis_t = f.vt;
      if (coordinate_mode) {
        basis_u_ = u_basis;
        basis_vt_ = v_basis_t;
      }
      snapshot_sigma = f.sigma;
      have_basis = true;
    }
  } else {
    const bool can_smooth = config_.smoothing && linalg::frobenius_norm(adapter_.a) != 0.0 &&
                            linalg::frobenius_norm(adapter_.b) != 0.0;
    if (can_smooth) {
      subspace::SmoothedRestart sm = subspace::smooth_restart(adapter_, g_used, *config_.smoothing);
      if (coordinate_mode) {
        // Same realized product, coordinates-in-A representation.
        const Matrix core =
            config_.smoothing->tau2 * (transpose(sm.u_ema) * old_product * sm.v_ema) -
            (1.0 - config_.smoothing->tau2) * (transpose(sm.u_ema) * g_used * sm.v_ema);
        adapter_.a = sm.u_ema * core;
        adapter_.b = transpose(sm.v_ema);
        basis_u_ = sm.u_ema;
        basis_vt_ = adapter_.b;
      } else {
        adapter_ = sm.adapter;
      }
      // The blended core keeps tau2 of the old product inside the new
      // adapters; absorbing the full product would count it twice. Absorb the
      // complement so the transition realizes exactly
      //   W <- W - (1 - tau2) * U_ema (U_ema^T G V_ema) V_ema^T.
      const Matrix retained =
          config_.smoothing->tau2 *
          (sm.u_ema * (transpose(sm.u_ema) * old_product * sm.v_ema) * transpose(sm.v_ema));
      subspace::absorb(anchored_, old_product - retained);
      u_basis = linalg::qr_thin(sm.u_ema).q;
      v_basis_t = transpose(linalg::qr_thin(sm.v_ema).q);
      snapshot_sigma = sm.core_sigma;
      have_basis = true;
      if (config_.alignment && config_.inner_opt == InnerOpt::AdamW) {
        const Matrix w_after = anchored_.w_tilde + subspace::realized(adapter_);
        pending_grad_ = noisy(objective_.full_grad(w_after));
        const auto [ga, gb] = problems::lora_grads(*pending_grad_, adapter_);
        optim::align_states_after_restart(state_a_, state_b_, ga, gb, sm.t_a, sm.t_b,
                                          config_.frequency_k / 3, config_.beta2_min);
      }
    } else {
      subspace::absorb(anchored_, old_product);
      subspace::RestartedAdapters plain =
          subspace::restart_adapters_from_gradient(g_used, config_.rank, 1.0 / eta);
      event.degenerate = plain.degenerate;
      if (!plain.degenerate) {
        const linalg::SvdFactors f = linalg::svd_top_r(-1.0 * g_used, config_.rank);
        if (coordinate_mode) {
          // Coordinates-in-A representation: A = eta * U * diag(sigma), B = Vt,
          // realizing the same projected gradient step.
          Matrix a = f.u;
          for (std::size_t j = 0; j < a.cols(); ++j)
            for (std::size_t i = 0; i < a.rows(); ++i) a(i, j) *= eta * f.sigma[j];
          adapter_.a = std::move(a);
          adapter_.b = f.vt;
          basis_u_ = f.u;
          basis_vt_ = f.vt;
        } else {
          adapter_.a = std::move(plain.adapter.a);
          adapter_.b = std::move(plain.adapter.b);
        }
        u_basis = f.u;
        v_basis_t = f.vt;
        snapshot_sigma = f.sigma;
        have_basis = true;
      } else {
        adapter_.a = std::move(plain.adapter.a);
        adapter_.b = std::move(plain.adapter.b);
      }
      if (config_.alignment && config_.inner_opt == InnerOpt::AdamW) {
        // No basis rotation on the plain path: identity transports.
        const Matrix w_after = anchored_.w_tilde + subspace::realized(adapter_);
        pending_grad_ = noisy(objective_.full_grad(w_after));
        const auto [ga, gb] = problems::lora_grads(*pending_grad_, adapter_);
        const Matrix eye = Matrix::identity(config_.rank);
        optim::align_states_after_restart(state_a_, state_b_, ga, gb, eye, eye,
                                          config_.frequency_k / 3, config_.beta2_min);
      }
    }
  }

  // Diagnostics are measured against the exact gradient.
  double delta = linalg::frobenius_norm(g_enter);
  double proj_norm = 0.0;
  if (have_basis) {
    const Matrix proj = subspace::project_svd_subspace(g_enter, u_basis, v_basis_t);
    proj_norm = linalg::frobenius_norm(proj);
    delta = subspace::subspace_distance(g_enter, proj);
  }

  event.loss_after = objective_.value(anchored_.w_tilde + subspace::realized(adapter_));
  event.projected_grad_norm = proj_norm;
  event.delta = delta;

  ExploreOutcome out;
  out.fired = true;
  out.delta = delta;
  out.event = event;
  if (have_basis) {
    SubspaceSnapshot snap;
    snap.step = k;
    snap.delta = delta;
    snap.sigma = std::move(snapshot_sigma);
    snap.u = std::move(u_basis);
    snap.v = transpose(v_basis_t);
    out.snapshot = std::move(snap);
  }
  return out;
}

void LoraRRunner::exploit(long k, double lr, const Matrix& g_enter, bool explored) {
  (void)k;
  Matrix g_w;
  if (explored) {
    if (pending_grad_) {
      g_w = std::move(*pending_grad_);
      pending_grad_.reset();
    } else {
      g_w = noisy(objective_.full_grad(realized()));
    }
  } else {
    g_w = noisy(g_enter);
  }
  if (config_.inner_opt == InnerOpt::AdamW) {
    const auto [ga, gb] = problems::lora_grads(g_w, adapter_);
    optim::adamw_step(state_a_, adapter_.a, ga, lr);
    optim::adamw_step(state_b_, adapter_.b, gb, lr);
  } else {
    // Gradient descent on the subspace coordinates: the realized step is
    // -lr * U (U^T G V^T) V, a descent direction whose effective Lipschitz
    // constant never exceeds the full-space one (the bases are contractions).
    if (basis_u_.empty()) return;  // no subspace injected yet
    const Matrix core_grad = transpose(basis_u_) * g_w * transpose(basis_vt_);
    adapter_.a -= lr * (basis_u_ * core_grad);
  }
}

Matrix LoraRRunner::realized() const { return anchored_.w_tilde + subspace::realized(adapter_); }

// ---------------------------------------------------------------------------
// PESO-LoRA-T

LoraTRunner::LoraTRunner(const problems::Objective& objective, const PesoConfig& config, Matrix w0)
    : objective_(objective),
      config_(config),
      origin_(std::move(w0)),
      state_u_(optim::AdamState::for_shape(objective.rows, config.rank, config.adam)),
      state_v_(optim::AdamState::for_shape(config.rank, objective.cols, config.adam)),
      state_xi_(optim::AdamState::for_shape(config.rank, 1, config.adam)) {
  validate_common(objective, config);
  // One-time full-gradient exploration fixes the initial bases; coordinates
  // start at zero so the realized weight is exactly w0.
  const Matrix g0 = noisy(objective_.full_grad(origin_));
  const linalg::SvdFactors f = linalg::svd_top_r(-1.0 * g0, config_.rank);
  adapter_.u = f.u;
  adapter_.v = f.vt;
  adapter_.xi.assign(config_.rank, 0.0);
  xi_param_ = Matrix(config_.rank, 1);
}

Matrix LoraTRunner::noisy(const Matrix& g) {
  if (!config_.noise) return g;
  return problems::noisy_grad(g, *config_.noise, ++draw_counter_);
}

void LoraTRunner::sync_xi() {
  for (std::size_t j = 0; j < adapter_.xi.size(); ++j) adapter_.xi[j] = xi_param_(j, 0);
}

ExploreOutcome LoraTRunner::explore(long k, const Matrix& g_enter) {
  // Warm-start exploration: one optimizer step on the bases (U, V).
  const Matrix g_used = noisy(g_enter);
  const problems::SpectralGrads sg = problems::spectral_grads(g_used, adapter_);
  const double lr = optim::lr_at(config_.inner_lr, k);
  if (config_.inner_opt == InnerOpt::AdamW) {
    optim::adamw_step(state_u_, adapter_.u, sg.grad_u, lr);
    optim::adamw_step(state_v_, adapter_.v, sg.grad_v, lr);
  } else {
    optim::sgd_step(adapter_.u, sg.grad_u, lr);
    optim::sgd_step(adapter_.v, sg.grad_v, lr);
  }
  ExploreOutcome out;
  out.fired = true;
  out.delta = spectral_span_distance(g_enter, adapter_);
  return out;
}

void LoraTRunner::exploit(long k, double lr, const Matrix& g_enter, bool explored) {
  (void)k;
  const Matrix g_w = explored ? noisy(objective_.full_grad(realized())) : noisy(g_enter);
  const problems::SpectralGrads sg = problems::spectral_grads(g_w, adapter_);
  Matrix gxi(config_.rank, 1);
  for (std::size_t j = 0; j < config_.rank; ++j) gxi(j, 0) = sg.grad_xi[j];
  if (config_.inner_opt == InnerOpt::AdamW) {
    optim::adamw_step(state_xi_, xi_param_, gxi, lr);
  } else {
    optim::sgd_step(xi_param_, gxi, lr);
  }
  sync_xi();
}

Matrix LoraTRunner::realized() const { return origin_ + subspace::realized(adapter_); }

// ---------------------------------------------------------------------------
// LoRA baseline

LoraBaselineRunner::LoraBaselineRunner(const problems::Objective& objective,
                                       const PesoConfig& config, Matrix w0)
    : objective_(objective),
      config_(config),
      origin_(std::move(w0)),
      state_a_(optim::AdamState::for_shape(objective.rows, config.rank, config.adam)),
      state_b_(optim::AdamState::for_shape(config.rank, objective.cols, config.adam)) {
  validate_common(objective, config);
  adapter_.a = rng::gaussian_matrix(objective.rows, config_.rank, config_.seed, kStreamLoraInit,
                                    1.0 / std::sqrt(static_cast<double>(config_.rank)));
  adapter_.b = Matrix(config_.rank, objective.cols);
  adapter_.gamma = config_.gamma;
}

Matrix LoraBaselineRunner::noisy(const Matrix& g) {
  if (!config_.noise) return g;
  return problems::noisy_grad(g, *config_.noise, ++draw_counter_);
}

void LoraBaselineRunner::exploit(long k, double lr, const Matrix& g_enter, bool explored) {
  (void)k;
  (void)explored;
  const Matrix g_w = noisy(g_enter);
  const auto [ga, gb] = problems::lora_grads(g_w, adapter_);
  if (config_.inner_opt == InnerOpt::AdamW) {
    optim::adamw_step(state_a_, adapter_.a, ga, lr);
    optim::adamw_step(state_b_, adapter_.b, gb, lr);
  } else {
    optim::sgd_step(adapter_.a, ga, lr);
    optim::sgd_step(adapter_.b, gb, lr);
  }
}

Matrix LoraBaselineRunner::realized() const { return origin_ + subspace::realized(adapter_); }

// ---------------------------------------------------------------------------
// Projected subspace descent baseline

GaloreRunner::GaloreRunner(const problems::Objective& objective, const PesoConfig& config,
                           Matrix w0)
    : objective_(objective),
      config_(config),
      w_(std::move(w0)),
      state_r_(optim::AdamState::for_shape(config.rank, objective.cols, config.adam)) {
  validate_common(objective, config);
  if (config_.max_restarts == 0)
    throw std::invalid_argument("galore: needs at least one projector refresh");
}

Matrix GaloreRunner::noisy(const Matrix& g) {
  if (!config_.noise) return g;
  return problems::noisy_grad(g, *config_.noise, ++draw_counter_);
}

ExploreOutcome GaloreRunner::explore(long k, const Matrix& g_enter) {
  const Matrix g_used = noisy(g_enter);
  const linalg::SvdFactors f = linalg::svd_top_r(g_used, config_.rank);
  projector_.p = f.u;

  const Matrix proj = projector_.p * (transpose(projector_.p) * g_enter);
  ExploreOutcome out;
  out.fired = true;
  out.delta = subspace::subspace_distance(g_enter, proj);

  RestartEvent event;
  event.step = k;
  event.loss_before = objective_.value(w_);
  event.loss_after = event.loss_before;  // the refresh itself does not move W
  event.projected_grad_norm = linalg::frobenius_norm(proj);
  event.delta = *out.delta;
  out.event = event;

  SubspaceSnapshot snap;
  snap.step = k;
  snap.delta = *out.delta;
  snap.sigma = f.sigma;
  snap.u = f.u;
  snap.v = transpose(f.vt);
  out.snapshot = std::move(snap);
  return out;
}

void GaloreRunner::exploit(long k, double lr, const Matrix& g_enter, bool explored) {
  (void)k;
  (void)explored;
  const Matrix g_w = noisy(g_enter);
  if (!config_.galore_adamw) {
    w_ = subspace::galore_step(w_, g_w, projector_, lr);
    return;
  }
  // AdamW-in-subspace variant: moments live on the projected gradient and the
  // normalized direction is written back through the projector.
  const Matrix subspace_grad = transpose(projector_.p) * g_w;
  const Matrix direction = optim::adamw_direction(state_r_, subspace_grad);
  w_ -= lr * (projector_.p * direction);
}

// ---------------------------------------------------------------------------

RunResult run_peso_lora_r(const problems::Objective& objective, const PesoConfig& config,
                          const Matrix* w0) {
  auto runner = std::make_shared<LoraRRunner>(objective, config, start_point(objective, w0));
  LoopHooks hooks;
  hooks.explore = [runner](long k, const Matrix& g) { return runner->explore(k, g); };
  hooks.exploit = [runner](long k, double lr, const Matrix& g, bool e) { runner->exploit(k, lr, g, e); };
  hooks.realized = [runner] { return runner->realized(); };
  return run_peso_generic(objective, config, hooks);
}

RunResult run_peso_lora_t(const problems::Objective& objective, const PesoConfig& config,
                          const Matrix* w0) {
  auto runner = std::make_shared<LoraTRunner>(objective, config, start_point(objective, w0));
  LoopHooks hooks;
  hooks.explore = [runner](long k, const Matrix& g) { return runner->explore(k, g); };
  hooks.exploit = [runner](long k, double lr, const Matrix& g, bool e) { runner->exploit(k, lr, g, e); };
  hooks.realized = [runner] { return runner->realized(); };
  return run_peso_generic(objective, config, hooks);
}

RunResult run_lora_baseline(const problems::Objective& objective, const PesoConfig& config,
                            const Matrix* w0) {
  auto runner = std::make_shared<LoraBaselineRunner>(objective, config, start_point(objective, w0));
  LoopHooks hooks;
  hooks.exploit = [runner](long k, double lr, const Matrix& g, bool e) { runner->exploit(k, lr, g, e); };
  hooks.realized = [runner] { return runner->realized(); };
  return run_peso_generic(objective, config, hooks);
}

RunResult run_galore_baseline(const problems::Objective& objective, const PesoConfig& config,
                              const Matrix* w0) {
  auto runner = std::make_shared<GaloreRunner>(objective, config, start_point(objective, w0));
  LoopHooks hooks;
  hooks.explore = [runner](long k, const Matrix& g) { return runner->explore(k, g); };
  hooks.exploit = [runner](long k, double lr, const Matrix& g, bool e) { runner->exploit(k, lr, g, e); };
  hooks.realized = [runner] { return runner->realized(); };
  return run_peso_generic(objective, config, hooks);
}

}  // namespace peso::driver
