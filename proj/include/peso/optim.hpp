// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "peso/matrix.hpp"

namespace peso::optim {

using linalg::Matrix;

/// Cosine ramp of the second-moment decay after a restart: β₂ starts at
/// beta2_min at restart_step and returns to beta2_final over `window` steps.
struct Beta2Warmup {
  double beta2_min = 0.95;
  double beta2_final = 0.999;
  long window = 0;       // T
  long restart_step = 0; // t_r
};

/// β₂(t) on the warm-up window; clamped to beta2_final past t_r + T.
/// Requires t ≥ t_r. window = 0 returns beta2_final immediately.
double beta2_at(const Beta2Warmup& schedule, long t);

struct AdamHyper {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
};

/// AdamW moments for one parameter matrix. Steps mutate in place; a state is
/// owned by exactly one training loop.
struct AdamState {
  Matrix m;
  Matrix v;
  long step = 0;
  AdamHyper hyper;
  std::optional<Beta2Warmup> beta2_warmup;

  static AdamState for_shape(std::size_t rows, std::size_t cols, const AdamHyper& hyper = {});
  /// β₂ in effect for update index t (warm-up wins over the constant).
  double beta2_effective(long t) const;
};

/// One decoupled-weight-decay Adam update:
///   m ← β₁m + (1−β₁)g,  v ← β₂v + (1−β₂)g⊙g,
///   param ← param − lr·λ·param − lr·m̂/(√v̂ + ε)
/// with bias corrections at t = step+1. Throws on non-finite gradients
/// without touching the state.
void adamw_step(AdamState& state, Matrix& param, const Matrix& grad, double lr);

/// Advances the moments for `grad` and returns the bias-corrected normalized
/// direction m̂/(√v̂ + ε) without applying it anywhere. Used where the
/// subspace coordinate is implicit and the step is written back through a
/// projection.
Matrix adamw_direction(AdamState& state, const Matrix& grad);

/// param ← param − lr·grad.
void sgd_step(Matrix& param, const Matrix& grad, double lr);

enum class ScheduleKind { Constant, CosineWarmup, Diminishing };

/// Learning-rate schedule; `t` is 1-based. Diminishing realizes η₀/t, which
/// satisfies Ση = ∞, Ση² < ∞.
struct LrSchedule {
  ScheduleKind kind = ScheduleKind::Constant;
  double base_lr = 1e-3;
  double warmup_ratio = 0.0;  // cosine only
  long total_steps = 0;       // cosine only
};

double lr_at(const LrSchedule& schedule, long t);

struct AlignmentReport {
  bool v_a_scaled = false;
  bool m_a_scaled = false;
  bool v_b_scaled = false;
  bool m_b_scaled = false;
  bool guarded() const { return !(v_a_scaled && m_a_scaled && v_b_scaled && m_b_scaled); }
};

/// Post-restart state surgery: rescale each velocity to rms(g)² and each
/// momentum to rms(g) (skipped below the 1e-12 guard), rotate the momenta
/// into the new bases (m_a ← m_a·t_a, m_b ← t_bᵀ·m_b), and re-arm the β₂
/// warm-up with the given window starting at the next update.
AlignmentReport align_states_after_restart(AdamState& state_a, AdamState& state_b,
                                           const Matrix& g_a, const Matrix& g_b,
                                           const Matrix& t_a, const Matrix& t_b,
                                           long warmup_window, double beta2_min = 0.95);

/// Text snapshot of an AdamW state (hyperparameters plus both moment
/// matrices); lossless round trip for checkpoint tests.
void save_adam_state(const AdamState& state, const std::string& path);
AdamState load_adam_state(const std::string& path);

}  // namespace peso::optim
