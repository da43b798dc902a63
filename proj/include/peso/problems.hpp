// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "peso/matrix.hpp"
#include "peso/subspace.hpp"

namespace peso::problems {

using linalg::Matrix;

/// A differentiable objective over one weight matrix with an exact full
/// gradient. Objectives are immutable after construction; value/grad calls
/// are pure and reentrant.
struct Objective {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::function<double(const Matrix&)> value;
  std::function<Matrix(const Matrix&)> full_grad;
  std::optional<double> lipschitz_bound;
};

/// Zero-mean Gaussian gradient noise with total variance ≤ variance_bound,
/// drawn counter-based from (seed, step) so replays are exact.
struct NoiseModel {
  double variance_bound = 0.0;
  std::uint64_t seed = 0;
};

/// ℓ(W) = ‖W − M‖_F² with M = a·diag(1,…,1,0,…,0), carrying r+1 ones. The
/// gradient is exactly 2(W − M) and the Lipschitz bound is 2.
Objective quadratic_objective(double a, std::size_t n, std::size_t r);

/// The target matrix M of the quadratic, exposed for fixture dumps.
Matrix quadratic_target(double a, std::size_t n, std::size_t r);

struct MlpConfig {
  std::size_t n_in = 8;
  std::size_t n_hidden = 8;
  std::size_t n_out = 4;
  std::size_t n_samples = 32;
  std::uint64_t seed = 0;
};

/// Fixed synthetic regression set plus the frozen readout layer.
struct MlpData {
  Matrix inputs;   // n_in × n_samples
  Matrix targets;  // n_out × n_samples
  Matrix readout;  // n_out × n_hidden, frozen
};

MlpData make_mlp_data(const MlpConfig& config);

/// Two-layer tanh network, squared loss, optimizing only the first-layer
/// weight (n_hidden × n_in). Gradients by manual backpropagation.
Objective mlp_objective(const MlpConfig& config);
Objective mlp_objective(const MlpConfig& config, MlpData data);

/// Chain rule through W = W̃ + A·B: grad_a = g·Bᵀ, grad_b = Aᵀ·g.
std::pair<Matrix, Matrix> lora_grads(const Matrix& g, const subspace::AdapterPair& adapter);

struct SpectralGrads {
  Matrix grad_u;               // m×r
  std::vector<double> grad_xi; // r
  Matrix grad_v;               // r×n
};

/// Chain rule through W = W₀ + U·diag(ξ)·V.
SpectralGrads spectral_grads(const Matrix& g, const subspace::SpectralAdapter& adapter);

/// g plus seeded Gaussian noise with per-entry variance C/(m·n); the output
/// is a pure function of (noise.seed, k).
Matrix noisy_grad(const Matrix& g, const NoiseModel& noise, std::uint64_t k);

}  // namespace peso::problems
