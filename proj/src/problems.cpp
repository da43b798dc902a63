// SPDX-License-Identifier: Apache-2.0

#include "peso/problems.hpp"

#include <cmath>
#include <stdexcept>

#include "peso/rng.hpp"

namespace peso::problems {

namespace {

// Fixed streams keep the three MLP draws independent of each other.
constexpr std::uint64_t kStreamInputs = 0x11;
constexpr std::uint64_t kStreamTargets = 0x22;
constexpr std::uint64_t kStreamReadout = 0x33;
constexpr std::uint64_t kStreamNoise = 0x44;

}  // namespace

Matrix quadratic_target(double a, std::size_t n, std::size_t r) {
  if (!(a > 0.0)) throw std::invalid_argument("quadratic_objective: a must be > 0");
  if (n < r + 1) throw std::invalid_argument("quadratic_objective: need n >= r+1");
  Matrix m(n, n);
  for (std::size_t i = 0; i < r + 1; ++i) m(i, i) = a;
  return m;
}

Objective quadratic_objective(double a, std::size_t n, std::size_t r) {
  const Matrix target = quadratic_target(a, n, r);
  Objective obj;
  obj.rows = n;
  obj.cols = n;
  obj.lipschitz_bound = 2.0;
  obj.value = [target](const Matrix& w) {
    const double d = linalg::frobenius_norm(w - target);
    return d * d;
  };
  obj.full_grad = [target](const Matrix& w) { return 2.0 * (w - target); };
  return obj;
}

MlpData make_mlp_data(const MlpConfig& config) {
  if (config.n_in == 0 || config.n_hidden == 0 || config.n_out == 0 || config.n_samples == 0)
    throw std::invalid_argument("mlp_objective: all layer sizes must be positive");
  MlpData data;
  data.inputs = rng::gaussian_matrix(config.n_in, config.n_samples, config.seed, kStreamInputs);
  data.targets = rng::gaussian_matrix(config.n_out, config.n_samples, config.seed, kStreamTargets);
  data.readout = rng::gaussian_matrix(config.n_out, config.n_hidden, config.seed, kStreamReadout,
                                      1.0 / std::sqrt(static_cast<double>(config.n_hidden)));
  return data;
}

Objective mlp_objective(const MlpConfig& config) { return mlp_objective(config, make_mlp_data(config)); }

Objective mlp_objective(const MlpConfig& config, MlpData data) {
  if (data.inputs.rows() != config.n_in || data.targets.rows() != config.n_out ||
      data.readout.rows() != config.n_out || data.readout.cols() != config.n_hidden ||
      data.inputs.cols() != data.targets.cols())
    throw std::invalid_argument("mlp_objective: data shapes inconsistent with config");

  const double inv_n = 1.0 / static_cast<double>(data.inputs.cols());
  const Matrix x = std::move(data.inputs);
  const Matrix y = std::move(data.targets);
  const Matrix w2 = std::move(data.readout);

  auto hidden = [x](const Matrix& w) {
    Matrix h = w * x;
    for (double& v : h.values()) v = std::tanh(v);
    return h;
  };

  Objective obj;
  obj.rows = config.n_hidden;
  obj.cols = config.n_in;
  obj.value = [x, y, w2, hidden, inv_n](const Matrix& w) {
    const Matrix resid = w2 * hidden(w) - y;
    const double f = linalg::frobenius_norm(resid);
    return 0.5 * inv_n * f * f;
  };
  obj.full_grad = [x, y, w2, hidden, inv_n](const Matrix& w) {
    const Matrix h = hidden(w);
    const Matrix resid = w2 * h - y;
    Matrix back = transpose(w2) * resid;  // n_hidden × n_samples
    for (std::size_t i = 0; i < back.size(); ++i)
      back.values()[i] *= (1.0 - h.values()[i] * h.values()[i]);
    return inv_n * (back * transpose(x));
  };
  return obj;
}

std::pair<Matrix, Matrix> lora_grads(const Matrix& g, const subspace::AdapterPair& adapter) {
  if (adapter.a.rows() != g.rows() || adapter.b.cols() != g.cols() ||
      adapter.a.cols() != adapter.b.rows())
    throw std::invalid_argument("lora_grads: adapter shapes do not match gradient");
  return {g * transpose(adapter.b), transpose(adapter.a) * g};
}

SpectralGrads spectral_grads(const Matrix& g, const subspace::SpectralAdapter& adapter) {
  const std::size_t r = adapter.u.cols();
  if (adapter.u.rows() != g.rows() || adapter.v.cols() != g.cols() || adapter.v.rows() != r ||
      adapter.xi.size() != r)
    throw std::invalid_argument("spectral_grads: adapter shapes do not match gradient");

  SpectralGrads out;
  const Matrix gvt = g * transpose(adapter.v);  // m×r
  out.grad_u = gvt;
  for (std::size_t j = 0; j < r; ++j)
    for (std::size_t i = 0; i < g.rows(); ++i) out.grad_u(i, j) *= adapter.xi[j];

  out.grad_xi.resize(r);
  for (std::size_t j = 0; j < r; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < g.rows(); ++i) s += adapter.u(i, j) * gvt(i, j);
    out.grad_xi[j] = s;
  }

  out.grad_v = transpose(adapter.u) * g;  // r×n
  for (std::size_t j = 0; j < r; ++j)
    for (std::size_t i = 0; i < g.cols(); ++i) out.grad_v(j, i) *= adapter.xi[j];
  return out;
}

Matrix noisy_grad(const Matrix& g, const NoiseModel& noise, std::uint64_t k) {
  if (noise.variance_bound < 0.0) throw std::invalid_argument("noisy_grad: negative variance bound");
  if (noise.variance_bound == 0.0) return g;
  const double stddev = std::sqrt(noise.variance_bound / static_cast<double>(g.size()));
  Matrix out = g;
  const std::uint64_t stream = rng::mix64(kStreamNoise ^ k);
  for (std::size_t i = 0; i < out.size(); ++i)
    out.values()[i] += stddev * rng::normal(noise.seed, stream, i);
  return out;
}

}  // namespace peso::problems
