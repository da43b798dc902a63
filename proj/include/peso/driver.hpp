// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "peso/optim.hpp"
#include "peso/problems.hpp"
#include "peso/subspace.hpp"
#include "peso/trace.hpp"

namespace peso::driver {

using linalg::Matrix;

enum class Exploration { FullGradientRestart, MuonRestart, WarmStartBases, None };
enum class InnerOpt { AdamW, Sgd };

struct PesoConfig {
  long frequency_k = 1;  // exploration fires when (k-1) mod K == 0
  long total_steps = 100;
  Exploration exploration = Exploration::FullGradientRestart;
  InnerOpt inner_opt = InnerOpt::AdamW;
  std::size_t rank = 1;
  double gamma = 1.0;
  std::optional<subspace::SmoothingConfig> smoothing;
  bool alignment = false;
  double beta2_min = 0.95;
  optim::AdamHyper adam;
  optim::LrSchedule inner_lr;
  /// Restart step sizes η_j indexed by restart ordinal; when absent the
  /// constant 1/γ implied by the adapter scaling is used.
  std::optional<optim::LrSchedule> restart_lr;
  std::optional<problems::NoiseModel> noise;
  std::uint64_t seed = 0;
  long max_restarts = -1;  // negative: unlimited
  bool galore_adamw = false;
};

/// Both realized points bracketing an exploration jump, plus the projected
/// gradient that drove it. Backs the restart descent checks.
struct RestartEvent {
  long step = 0;
  double loss_before = 0.0;
  double loss_after = 0.0;
  double projected_grad_norm = 0.0;
  double delta = 0.0;
  bool degenerate = false;
};

struct SubspaceSnapshot {
  long step = 0;
  double delta = 0.0;
  std::vector<double> sigma;
  Matrix u;  // m×r left basis injected at this exploration
  Matrix v;  // n×r right basis
};

struct RunResult {
  Matrix final_w;
  harness::RunTrace trace;
  std::vector<long> restart_steps;
  std::vector<RestartEvent> restart_events;
  std::vector<SubspaceSnapshot> snapshots;
  harness::TraceSummary summary;
};

/// A failed run still carries everything traced up to the failure.
struct run_aborted : std::runtime_error {
  run_aborted(const std::string& what, RunResult partial_)
      : std::runtime_error(what), partial(std::move(partial_)) {}
  RunResult partial;
};

struct ExploreOutcome {
  bool fired = false;
  std::optional<double> delta;
  std::optional<RestartEvent> event;
  std::optional<SubspaceSnapshot> snapshot;
};

/// Pluggable exploration/exploitation pair driven by the generic loop.
/// `g_enter` is the exact full gradient at the iterate entering step k.
struct LoopHooks {
  std::function<ExploreOutcome(long k, const Matrix& g_enter)> explore;  // may be empty
  std::function<void(long k, double lr, const Matrix& g_enter, bool explored)> exploit;
  std::function<Matrix()> realized;
};

/// The generic loop: gated exploration, per-step exploitation, full trace.
RunResult run_peso_generic(const problems::Objective& objective, const PesoConfig& config,
                           const LoopHooks& hooks);

// ---------------------------------------------------------------------------
// Concrete runners. The classes expose the stepwise pieces so tests can drive
// a single gate or exploitation step; the run_* helpers wire them into the
// generic loop. Passing w0 == nullptr starts from the zero matrix.

/// LoRA adapters with periodic full-gradient (or Muon-style) restarts,
/// optional restart smoothing and optimizer-state alignment.
class LoraRRunner {
public:
  LoraRRunner(const problems::Objective& objective, const PesoConfig& config, Matrix w0);

  ExploreOutcome explore(long k, const Matrix& g_enter);
  void exploit(long k, double lr, const Matrix& g_enter, bool explored);
  Matrix realized() const;

  const subspace::AdapterPair& adapter() const { return adapter_; }
  const subspace::AnchoredState& anchored() const { return anchored_; }
  const optim::AdamState& state_a() const { return state_a_; }

private:
  Matrix noisy(const Matrix& g);
  double restart_eta();

  const problems::Objective& objective_;
  PesoConfig config_;
  subspace::AnchoredState anchored_;
  subspace::AdapterPair adapter_;
  optim::AdamState state_a_;
  optim::AdamState state_b_;
  // SGD exploitation runs gradient descent on the subspace coordinates
  // through these fixed restart bases (B holds basis_vt_, A the coordinates);
  // AdamW exploitation works on the bilinear factors instead.
  Matrix basis_u_;
  Matrix basis_vt_;
  std::optional<Matrix> pending_grad_;  // post-restart gradient shared with exploit
  std::uint64_t draw_counter_ = 0;
  long restart_ordinal_ = 0;
};

/// SVD-subspace parameterization: AdamW on (U,V) only at gated steps, AdamW
/// on the coordinates ξ every step, anchored state fixed at W₀.
class LoraTRunner {
public:
  LoraTRunner(const problems::Objective& objective, const PesoConfig& config, Matrix w0);

  ExploreOutcome explore(long k, const Matrix& g_enter);
  void exploit(long k, double lr, const Matrix& g_enter, bool explored);
  Matrix realized() const;

  const subspace::SpectralAdapter& adapter() const { return adapter_; }

private:
  Matrix noisy(const Matrix& g);
  void sync_xi();

  const problems::Objective& objective_;
  PesoConfig config_;
  Matrix origin_;
  subspace::SpectralAdapter adapter_;
  Matrix xi_param_;  // r×1 view of the coordinates for the optimizer
  optim::AdamState state_u_;
  optim::AdamState state_v_;
  optim::AdamState state_xi_;
  std::uint64_t draw_counter_ = 0;
};

/// Plain LoRA: A ~ N(0, 1/r), B = 0, AdamW every step, anchored state frozen.
class LoraBaselineRunner {
public:
  LoraBaselineRunner(const problems::Objective& objective, const PesoConfig& config, Matrix w0);

  void exploit(long k, double lr, const Matrix& g_enter, bool explored);
  Matrix realized() const;

  const subspace::AdapterPair& adapter() const { return adapter_; }

private:
  Matrix noisy(const Matrix& g);

  const problems::Objective& objective_;
  PesoConfig config_;
  Matrix origin_;
  subspace::AdapterPair adapter_;
  optim::AdamState state_a_;
  optim::AdamState state_b_;
  std::uint64_t draw_counter_ = 0;
};

/// Projected subspace descent: P from the left r-SVD of the gradient at gated
/// steps, per-step update W ← W − η·P·Pᵀ·G (AdamW-in-subspace behind a flag).
class GaloreRunner {
public:
  GaloreRunner(const problems::Objective& objective, const PesoConfig& config, Matrix w0);

  ExploreOutcome explore(long k, const Matrix& g_enter);
  void exploit(long k, double lr, const Matrix& g_enter, bool explored);
  Matrix realized() const { return w_; }

  const subspace::ProjectedSubspace& projector() const { return projector_; }

private:
  Matrix noisy(const Matrix& g);

  const problems::Objective& objective_;
  PesoConfig config_;
  Matrix w_;
  subspace::ProjectedSubspace projector_;
  optim::AdamState state_r_;  // subspace-coordinate moments for the flag variant
  std::uint64_t draw_counter_ = 0;
};

RunResult run_peso_lora_r(const problems::Objective& objective, const PesoConfig& config,
                          const Matrix* w0 = nullptr);
RunResult run_peso_lora_t(const problems::Objective& objective, const PesoConfig& config,
                          const Matrix* w0 = nullptr);
RunResult run_lora_baseline(const problems::Objective& objective, const PesoConfig& config,
                            const Matrix* w0 = nullptr);
RunResult run_galore_baseline(const problems::Objective& objective, const PesoConfig& config,
                              const Matrix* w0 = nullptr);

}  // namespace peso::driver
