// SPDX-License-Identifier: Apache-2.0

#include "peso/optim.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "peso/linalg.hpp"

namespace peso::optim {

namespace {
constexpr double kStateGuard = 1e-12;  // below this rms, scaling is skipped
constexpr double kPi = 3.14159265358979323846;
}  // namespace

double beta2_at(const Beta2Warmup& schedule, long t) {
  if (t < schedule.restart_step)
    throw std::invalid_argument("beta2_at: step precedes the restart");
  if (schedule.window <= 0) return schedule.beta2_final;
  const long offset = t - schedule.restart_step;
  if (offset >= schedule.window) return schedule.beta2_final;
  const double phase = static_cast<double>(offset) / static_cast<double>(schedule.window);
  return schedule.beta2_min +
         (schedule.beta2_final - schedule.beta2_min) * 0.5 * (1.0 - std::cos(kPi * phase));
}

AdamState AdamState::for_shape(std::size_t rows, std::size_t cols, const AdamHyper& hyper_in) {
  AdamState s;
  s.m = Matrix(rows, cols);
  s.v = Matrix(rows, cols);
  s.hyper = hyper_in;
  return s;
}

double AdamState::beta2_effective(long t) const {
  if (beta2_warmup && t >= beta2_warmup->restart_step) return beta2_at(*beta2_warmup, t);
  return hyper.beta2;
}

void adamw_step(AdamState& state, Matrix& param, const Matrix& grad, double lr) {
  if (!param.same_shape(grad) || !state.m.same_shape(param))
    throw std::invalid_argument("adamw_step: shape mismatch");
  if (!(lr >= 0.0)) throw std::invalid_argument("adamw_step: lr must be >= 0");
  if (!linalg::all_finite(grad)) throw std::invalid_argument("adamw_step: non-finite gradient");

  const long t = state.step + 1;
  const double b1 = state.hyper.beta1;
  const double b2 = state.beta2_effective(t);
  const double bias1 = 1.0 - std::pow(b1, static_cast<double>(t));
  const double bias2 = 1.0 - std::pow(b2, static_cast<double>(t));
  const double decay = lr * state.hyper.weight_decay;

  for (std::size_t i = 0; i < param.size(); ++i) {
    const double g = grad.values()[i];
    double& m = state.m.values()[i];
    double& v = state.v.values()[i];
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g * g;
    const double m_hat = m / bias1;
    const double v_hat = v / bias2;
    double& p = param.values()[i];
    p -= decay * p + lr * m_hat / (std::sqrt(v_hat) + state.hyper.eps);
  }
  state.step = t;
}

Matrix adamw_direction(AdamState& state, const Matrix& grad) {
  if (!state.m.same_shape(grad)) throw std::invalid_argument("adamw_direction: shape mismatch");
  if (!linalg::all_finite(grad)) throw std::invalid_argument("adamw_direction: non-finite gradient");
  const long t = state.step + 1;
  const double b1 = state.hyper.beta1;
  const double b2 = state.beta2_effective(t);
  const double bias1 = 1.0 - std::pow(b1, static_cast<double>(t));
  const double bias2 = 1.0 - std::pow(b2, static_cast<double>(t));
  Matrix direction(grad.rows(), grad.cols());
  for (std::size_t i = 0; i < grad.size(); ++i) {
    const double g = grad.values()[i];
    double& m = state.m.values()[i];
    double& v = state.v.values()[i];
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g * g;
    direction.values()[i] = (m / bias1) / (std::sqrt(v / bias2) + state.hyper.eps);
  }
  state.step = t;
  return direction;
}

void sgd_step(Matrix& param, const Matrix& grad, double lr) {
  if (!param.same_shape(grad)) throw std::invalid_argument("sgd_step: shape mismatch");
  if (!linalg::all_finite(grad)) throw std::invalid_argument("sgd_step: non-finite gradient");
  for (std::size_t i = 0; i < param.size(); ++i) param.values()[i] -= lr * grad.values()[i];
}

double lr_at(const LrSchedule& schedule, long t) {
  if (t < 1) throw std::invalid_argument("lr_at: steps are 1-based");
  switch (schedule.kind) {
    case ScheduleKind::Constant:
      return schedule.base_lr;
    case ScheduleKind::Diminishing:
      return schedule.base_lr / static_cast<double>(t);
    case ScheduleKind::CosineWarmup: {
      const long total = std::max<long>(schedule.total_steps, 1);
      const long warmup =
          std::max<long>(1, static_cast<long>(schedule.warmup_ratio * static_cast<double>(total)));
      if (t <= warmup)
        return schedule.base_lr * static_cast<double>(t) / static_cast<double>(warmup);
      if (t >= total) return 0.0;
      const double phase =
          static_cast<double>(t - warmup) / static_cast<double>(total - warmup);
      return schedule.base_lr * 0.5 * (1.0 + std::cos(kPi * phase));
    }
  }
  throw std::logic_error("lr_at: unknown schedule kind");
}

namespace {

// v ← (rms(g)²/rms(v))·v and m ← (rms(g)/rms(m))·m with a zero-state guard.
void scale_side(AdamState& state, const Matrix& g, bool& v_scaled, bool& m_scaled) {
  const double g_rms = linalg::rms_norm(g);
  const double v_rms = linalg::rms_norm(state.v);
  const double m_rms = linalg::rms_norm(state.m);
  if (v_rms >= kStateGuard) {
    const double s = g_rms * g_rms / v_rms;
    for (double& x : state.v.values()) x *= s;
    v_scaled = true;
  }
  if (m_rms >= kStateGuard) {
    const double s = g_rms / m_rms;
    for (double& x : state.m.values()) x *= s;
    m_scaled = true;
  }
}

}  // namespace

AlignmentReport align_states_after_restart(AdamState& state_a, AdamState& state_b,
                                           const Matrix& g_a, const Matrix& g_b,
                                           const Matrix& t_a, const Matrix& t_b,
                                           long warmup_window, double beta2_min) {
  AlignmentReport report;
  scale_side(state_a, g_a, report.v_a_scaled, report.m_a_scaled);
  scale_side(state_b, g_b, report.v_b_scaled, report.m_b_scaled);

  state_a.m = state_a.m * t_a;
  state_b.m = transpose(t_b) * state_b.m;

  Beta2Warmup warmup;
  warmup.beta2_min = beta2_min;
  warmup.beta2_final = state_a.hyper.beta2;
  warmup.window = warmup_window;
  // Armed so the first update after the restart sees β₂ = beta2_min.
  warmup.restart_step = state_a.step + 1;
  state_a.beta2_warmup = warmup;
  warmup.beta2_final = state_b.hyper.beta2;
  warmup.restart_step = state_b.step + 1;
  state_b.beta2_warmup = warmup;
  return report;
}

void save_adam_state(const AdamState& state, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for write: " + path);
  os << std::setprecision(17);
  os << state.step << "," << state.hyper.beta1 << "," << state.hyper.beta2 << ","
     << state.hyper.eps << "," << state.hyper.weight_decay;
  if (state.beta2_warmup) {
    os << "," << state.beta2_warmup->beta2_min << "," << state.beta2_warmup->beta2_final << ","
       << state.beta2_warmup->window << "," << state.beta2_warmup->restart_step;
  }
  os << "\n";
  linalg::write_matrix_csv(state.m, os);
  linalg::write_matrix_csv(state.v, os);
}

AdamState load_adam_state(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open for read: " + path);
  std::string header;
  if (!std::getline(is, header)) throw std::runtime_error("adam state: missing header");

  std::vector<double> fields;
  std::istringstream hs(header);
  std::string cell;
  while (std::getline(hs, cell, ',')) fields.push_back(std::strtod(cell.c_str(), nullptr));
  if (fields.size() != 5 && fields.size() != 9)
    throw std::runtime_error("adam state: malformed header");

  AdamState s;
  s.step = static_cast<long>(fields[0]);
  s.hyper.beta1 = fields[1];
  s.hyper.beta2 = fields[2];
  s.hyper.eps = fields[3];
  s.hyper.weight_decay = fields[4];
  if (fields.size() == 9) {
    Beta2Warmup w;
    w.beta2_min = fields[5];
    w.beta2_final = fields[6];
    w.window = static_cast<long>(fields[7]);
    w.restart_step = static_cast<long>(fields[8]);
    s.beta2_warmup = w;
  }
  s.m = linalg::read_matrix_csv(is);
  s.v = linalg::read_matrix_csv(is);
  return s;
}

}  // namespace peso::optim
