// SPDX-License-Identifier: Apache-2.0

#include "peso/checks.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "peso/config.hpp"
#include "peso/driver.hpp"
#include "peso/linalg.hpp"
#include "peso/optim.hpp"
#include "peso/problems.hpp"
#include "peso/rng.hpp"
#include "peso/subspace.hpp"
#include "peso/trace.hpp"

namespace peso::checks {

namespace {

using linalg::Matrix;

constexpr std::uint64_t kCheckSeed = 0xC0FFEE;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << std::scientific << v;
  return os.str();
}

Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t tag, double scale = 1.0) {
  return rng::gaussian_matrix(rows, cols, kCheckSeed, tag, scale);
}

Matrix random_orthonormal(std::size_t rows, std::size_t cols, std::uint64_t tag) {
  return linalg::qr_thin(random_matrix(rows, cols, tag)).q;
}

CheckResult result(std::string name, bool pass, std::string detail) {
  return CheckResult{std::move(name), pass, std::move(detail)};
}

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Central finite differences of a scalar function over every entry of x.
template <typename F>
Matrix finite_difference(const F& f, Matrix x, double h = 1e-5) {
  Matrix g(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x.values()[i];
    x.values()[i] = saved + h;
    const double up = f(x);
    x.values()[i] = saved - h;
    const double down = f(x);
    x.values()[i] = saved;
    g.values()[i] = (up - down) / (2.0 * h);
  }
  return g;
}

double rel_error(const Matrix& computed, const Matrix& reference) {
  const double denom = std::max(linalg::frobenius_norm(reference), 1e-12);
  return linalg::frobenius_norm(computed - reference) / denom;
}

}  // namespace

// ---------------------------------------------------------------------------

SuiteResult check_linalg(const FaultInjection& fault) {
  SuiteResult suite{"linalg", {}};
  const std::vector<std::pair<std::size_t, std::size_t>> shapes = {
      {3, 3}, {8, 3}, {6, 4}, {4, 6}, {10, 6}, {16, 16}, {5, 1}, {1, 5}, {12, 2}, {2, 12}};
  constexpr int kPerShape = 1000;

  double worst_svd_resid = 0.0, worst_orth = 0.0, worst_qr_resid = 0.0, worst_qr_orth = 0.0;
  double worst_ey = 0.0, worst_lemma_slack = 0.0;
  bool lemma_ok = true;

  const auto t0 = std::chrono::steady_clock::now();
  std::uint64_t tag = 1;
  for (const auto& [m, n] : shapes) {
    for (int it = 0; it < kPerShape; ++it) {
      const Matrix a = random_matrix(m, n, tag++);
      linalg::SvdFactors f = linalg::svd_full(a);
      if (fault.svd_sigma_perturb != 0.0 && !f.sigma.empty())
        f.sigma[0] += fault.svd_sigma_perturb;
      const double anorm = std::max(linalg::frobenius_norm(a), 1e-300);
      worst_svd_resid =
          std::max(worst_svd_resid, linalg::frobenius_norm(linalg::svd_reconstruct(f) - a) / anorm);
      const std::size_t k = f.sigma.size();
      worst_orth = std::max(worst_orth,
                            linalg::max_abs(transpose(f.u) * f.u - Matrix::identity(k)));
      worst_orth = std::max(worst_orth,
                            linalg::max_abs(f.vt * transpose(f.vt) - Matrix::identity(k)));

      // Eckart–Young tail identity and the (1 - r/p) bound for a random rank.
      const std::size_t p = std::min(m, n);
      const std::size_t r = 1 + rng::word(kCheckSeed, 999, tag) % p;
      const linalg::SvdFactors top = linalg::svd_top_r(a, r);
      const double resid2 = std::pow(linalg::frobenius_norm(a - linalg::svd_reconstruct(top)), 2);
      double tail = 0.0;
      for (std::size_t i = r; i < k; ++i) tail += f.sigma[i] * f.sigma[i];
      const double total = std::pow(linalg::frobenius_norm(a), 2);
      worst_ey = std::max(worst_ey, std::abs(resid2 - tail) / std::max(total, 1e-300));
      const double bound = (1.0 - static_cast<double>(r) / static_cast<double>(p)) * total;
      if (resid2 > bound + 1e-10 * std::max(total, 1.0)) lemma_ok = false;
      worst_lemma_slack = std::max(worst_lemma_slack, resid2 - bound);

      if (m >= n) {
        const linalg::QrResult qr = linalg::qr_thin(a);
        worst_qr_resid =
            std::max(worst_qr_resid, linalg::frobenius_norm(qr.q * qr.r - a) / anorm);
        worst_qr_orth = std::max(
            worst_qr_orth, linalg::max_abs(transpose(qr.q) * qr.q - Matrix::identity(n)));
      }
    }
  }
  const double elapsed = seconds_since(t0);

  suite.checks.push_back(result("svd-reconstruction", worst_svd_resid <= 1e-9,
                                "max relative residual " + fmt(worst_svd_resid) + " (bound 1e-9)"));
  suite.checks.push_back(result("svd-orthogonality", worst_orth <= 1e-10,
                                "max deviation from identity " + fmt(worst_orth) + " (bound 1e-10)"));
  suite.checks.push_back(result("qr-reconstruction", worst_qr_resid <= 1e-10,
                                "max relative residual " + fmt(worst_qr_resid) + " (bound 1e-10)"));
  suite.checks.push_back(result("qr-orthogonality", worst_qr_orth <= 1e-10,
                                "max deviation from identity " + fmt(worst_qr_orth) + " (bound 1e-10)"));
  suite.checks.push_back(result("eckart-young-tail", worst_ey <= 1e-8,
                                "max relative tail mismatch " + fmt(worst_ey) + " (bound 1e-8)"));
  suite.checks.push_back(result("rank-fraction-bound", lemma_ok,
                                "max slack over the (1-r/p) bound " + fmt(worst_lemma_slack)));
  suite.checks.push_back(
      result("factorization-runtime", elapsed < 10.0, fmt(elapsed) + " s (bound 10 s)"));

  // Procrustes optimality against sampled orthogonal rotations.
  bool procrustes_ok = true;
  double worst_margin = 0.0;
  for (int pair = 0; pair < 100; ++pair) {
    const Matrix source = random_orthonormal(8, 3, 5000 + 2 * pair);
    const Matrix target = random_orthonormal(8, 3, 5001 + 2 * pair);
    const linalg::ProcrustesResult pr = linalg::orthogonal_procrustes(source, target);
    const double resid =
        linalg::frobenius_norm(source * transpose(pr.r_align) - target);
    for (int sample = 0; sample < 100; ++sample) {
      const Matrix rot = random_orthonormal(3, 3, 7000 + 100 * pair + sample);
      const double other = linalg::frobenius_norm(source * rot - target);
      if (resid > other + 1e-12) procrustes_ok = false;
      worst_margin = std::max(worst_margin, resid - other);
    }
  }
  suite.checks.push_back(result("procrustes-optimality", procrustes_ok,
                                "worst residual margin vs samples " + fmt(worst_margin)));
  return suite;
}

// ---------------------------------------------------------------------------

SuiteResult check_grads() {
  SuiteResult suite{"grads", {}};

  const problems::Objective quad = problems::quadratic_objective(10.0, 16, 3);
  double worst = 0.0;
  for (int point = 0; point < 20; ++point) {
    const Matrix w = random_matrix(16, 16, 100 + point, 3.0);
    worst = std::max(worst, rel_error(quad.full_grad(w), finite_difference(quad.value, w)));
  }
  suite.checks.push_back(
      result("quadratic-gradient", worst < 1e-6, "max relative error " + fmt(worst)));

  problems::MlpConfig mlp_cfg;
  mlp_cfg.n_in = 6;
  mlp_cfg.n_hidden = 8;
  mlp_cfg.n_out = 4;
  mlp_cfg.n_samples = 24;
  mlp_cfg.seed = 11;
  const problems::Objective mlp = problems::mlp_objective(mlp_cfg);
  worst = 0.0;
  for (int point = 0; point < 20; ++point) {
    const Matrix w = random_matrix(8, 6, 200 + point, 0.7);
    worst = std::max(worst, rel_error(mlp.full_grad(w), finite_difference(mlp.value, w)));
  }
  suite.checks.push_back(result("mlp-gradient", worst < 1e-6, "max relative error " + fmt(worst)));

  // Adapter gradients, differentiated through the realized weight.
  double worst_a = 0.0, worst_b = 0.0;
  for (int point = 0; point < 20; ++point) {
    const Matrix w_tilde = random_matrix(8, 6, 300 + point, 0.5);
    subspace::AdapterPair adapter;
    adapter.a = random_matrix(8, 2, 320 + point);
    adapter.b = random_matrix(2, 6, 340 + point);
    const Matrix g = mlp.full_grad(w_tilde + adapter.a * adapter.b);
    const auto [ga, gb] = problems::lora_grads(g, adapter);
    const auto loss_of_a = [&](const Matrix& a) { return mlp.value(w_tilde + a * adapter.b); };
    const auto loss_of_b = [&](const Matrix& b) { return mlp.value(w_tilde + adapter.a * b); };
    worst_a = std::max(worst_a, rel_error(ga, finite_difference(loss_of_a, adapter.a)));
    worst_b = std::max(worst_b, rel_error(gb, finite_difference(loss_of_b, adapter.b)));
  }
  suite.checks.push_back(result("lora-gradients", worst_a < 1e-6 && worst_b < 1e-6,
                                "max relative error A " + fmt(worst_a) + ", B " + fmt(worst_b)));

  double worst_u = 0.0, worst_xi = 0.0, worst_v = 0.0;
  for (int point = 0; point < 20; ++point) {
    subspace::SpectralAdapter adapter;
    adapter.u = random_matrix(8, 2, 400 + point);
    adapter.v = random_matrix(2, 6, 420 + point);
    adapter.xi = {rng::normal(kCheckSeed, 440, point), rng::normal(kCheckSeed, 441, point)};
    const Matrix w0 = random_matrix(8, 6, 460 + point, 0.5);
    const Matrix g = mlp.full_grad(w0 + subspace::realized(adapter));
    const problems::SpectralGrads sg = problems::spectral_grads(g, adapter);

    const auto loss_of_u = [&](const Matrix& u) {
      subspace::SpectralAdapter tmp = adapter;
      tmp.u = u;
      return mlp.value(w0 + subspace::realized(tmp));
    };
    const auto loss_of_v = [&](const Matrix& v) {
      subspace::SpectralAdapter tmp = adapter;
      tmp.v = v;
      return mlp.value(w0 + subspace::realized(tmp));
    };
    const auto loss_of_xi = [&](const Matrix& xi) {
      subspace::SpectralAdapter tmp = adapter;
      for (std::size_t j = 0; j < tmp.xi.size(); ++j) tmp.xi[j] = xi(j, 0);
      return mlp.value(w0 + subspace::realized(tmp));
    };
    Matrix xi_mat(2, 1);
    xi_mat(0, 0) = adapter.xi[0];
    xi_mat(1, 0) = adapter.xi[1];
    Matrix gxi(2, 1);
    gxi(0, 0) = sg.grad_xi[0];
    gxi(1, 0) = sg.grad_xi[1];
    worst_u = std::max(worst_u, rel_error(sg.grad_u, finite_difference(loss_of_u, adapter.u)));
    worst_v = std::max(worst_v, rel_error(sg.grad_v, finite_difference(loss_of_v, adapter.v)));
    worst_xi = std::max(worst_xi, rel_error(gxi, finite_difference(loss_of_xi, xi_mat)));
  }
  suite.checks.push_back(result(
      "spectral-gradients", worst_u < 1e-6 && worst_xi < 1e-6 && worst_v < 1e-6,
      "max relative error U " + fmt(worst_u) + ", xi " + fmt(worst_xi) + ", V " + fmt(worst_v)));

  // Noise model statistics at a fixed seed.
  {
    const problems::NoiseModel model{1.0, 7};
    const Matrix zero(4, 4);
    constexpr int kDraws = 10000;
    Matrix mean(4, 4);
    Matrix second(4, 4);
    for (int draw = 1; draw <= kDraws; ++draw) {
      const Matrix sample = problems::noisy_grad(zero, model, static_cast<std::uint64_t>(draw));
      mean += sample;
      second += hadamard(sample, sample);
    }
    mean = (1.0 / kDraws) * mean;
    second = (1.0 / kDraws) * second;
    const double per_entry_sigma = std::sqrt(1.0 / 16.0);
    const double mean_sigma = per_entry_sigma / std::sqrt(static_cast<double>(kDraws));
    bool mean_ok = true;
    double total_var = 0.0;
    for (std::size_t i = 0; i < 16; ++i) {
      if (std::abs(mean.values()[i]) > 3.0 * mean_sigma) mean_ok = false;
      total_var += second.values()[i] - mean.values()[i] * mean.values()[i];
    }
    const bool var_ok = total_var <= 1.1 && total_var >= 0.9;
    const Matrix g = random_matrix(4, 4, 555);
    const bool zero_c_ok =
        linalg::frobenius_norm(problems::noisy_grad(g, problems::NoiseModel{0.0, 7}, 3) - g) == 0.0;
    const bool repeat_ok = linalg::frobenius_norm(problems::noisy_grad(g, model, 12) -
                                                  problems::noisy_grad(g, model, 12)) == 0.0;
    suite.checks.push_back(result("noise-statistics", mean_ok && var_ok && zero_c_ok && repeat_ok,
                                  "total variance " + fmt(total_var) +
                                      " (bound [0.9, 1.1]), mean within 3 sigma: " +
                                      (mean_ok ? "yes" : "no")));
  }
  return suite;
}

// ---------------------------------------------------------------------------

SuiteResult check_restart_identity() {
  SuiteResult suite{"restart-identity", {}};
  const auto t0 = std::chrono::steady_clock::now();
  const double gammas[] = {0.25, 1.0, 4.0, 16.0};
  double worst = 0.0;
  for (int it = 0; it < 500; ++it) {
    const std::size_t m = 4 + rng::word(kCheckSeed, 801, it) % 9;
    const std::size_t n = 4 + rng::word(kCheckSeed, 802, it) % 9;
    const std::size_t r = 1 + rng::word(kCheckSeed, 803, it) % std::min(m, n);
    const double gamma = gammas[it % 4];
    const Matrix g = random_matrix(m, n, 810 + it, 3.0);
    const subspace::RestartedAdapters restarted =
        subspace::restart_adapters_from_gradient(g, r, gamma);
    const Matrix recon = linalg::svd_reconstruct(linalg::svd_top_r(g, r));
    const double err = linalg::frobenius_norm(subspace::realized(restarted.adapter) +
                                              (1.0 / gamma) * recon);
    worst = std::max(worst, err);
  }
  const double elapsed = seconds_since(t0);
  suite.checks.push_back(result("restart-identity", worst < 1e-10,
                                "max ||A*B + (1/gamma)*topr(G)||_F " + fmt(worst) + " (bound 1e-10)"));
  suite.checks.push_back(result("restart-runtime", elapsed < 10.0, fmt(elapsed) + " s (bound 10 s)"));
  return suite;
}

// ---------------------------------------------------------------------------

SuiteResult check_subspace() {
  SuiteResult suite{"subspace", {}};

  double worst_idem = 0.0, worst_pyth = 0.0, worst_delta_slack = 0.0;
  for (int it = 0; it < 200; ++it) {
    const std::size_t m = 5 + rng::word(kCheckSeed, 901, it) % 8;
    const std::size_t n = 5 + rng::word(kCheckSeed, 902, it) % 8;
    const std::size_t p = std::min(m, n);
    const std::size_t r = 1 + rng::word(kCheckSeed, 903, it) % p;
    const Matrix g = random_matrix(m, n, 910 + it, 2.0);
    const linalg::SvdFactors f = linalg::svd_top_r(g, r);
    const Matrix proj = subspace::project_svd_subspace(g, f.u, f.vt);
    const Matrix twice = subspace::project_svd_subspace(proj, f.u, f.vt);
    worst_idem = std::max(worst_idem, linalg::frobenius_norm(twice - proj));
    const double delta = subspace::subspace_distance(g, proj);
    const double g2 = std::pow(linalg::frobenius_norm(g), 2);
    worst_pyth = std::max(worst_pyth,
                          std::abs(g2 - std::pow(linalg::frobenius_norm(proj), 2) - delta * delta));
    const double bound = (1.0 - static_cast<double>(r) / static_cast<double>(p)) * g2;
    worst_delta_slack = std::max(worst_delta_slack, delta * delta - bound);
  }
  suite.checks.push_back(
      result("projection-idempotence", worst_idem <= 1e-10, "max drift " + fmt(worst_idem)));
  suite.checks.push_back(
      result("pythagorean-identity", worst_pyth <= 1e-9, "max defect " + fmt(worst_pyth)));
  suite.checks.push_back(result("delta-rank-bound", worst_delta_slack <= 1e-10,
                                "max slack " + fmt(worst_delta_slack)));

  // Smoothing pipeline: reconstruction identity and endpoint behavior.
  double worst_core = 0.0, worst_tnorm = 0.0, worst_tau1 = 0.0, worst_tau0 = 0.0;
  for (int it = 0; it < 100; ++it) {
    subspace::AdapterPair adapter;
    adapter.a = random_matrix(8, 3, 1000 + it);
    adapter.b = random_matrix(3, 6, 1100 + it);
    const Matrix g = random_matrix(8, 6, 1200 + it, 2.0);
    const Matrix old_product = subspace::realized(adapter);

    const subspace::SmoothedRestart sm =
        subspace::smooth_restart(adapter, g, subspace::SmoothingConfig{0.9, 0.9});
    const Matrix core = 0.9 * (transpose(sm.u_ema) * old_product * sm.v_ema) -
                        0.1 * (transpose(sm.u_ema) * g * sm.v_ema);
    worst_core = std::max(worst_core,
                          linalg::frobenius_norm(subspace::realized(sm.adapter) -
                                                 sm.u_ema * core * transpose(sm.v_ema)));
    const linalg::SvdFactors ta = linalg::svd_full(sm.t_a);
    worst_tnorm = std::max(worst_tnorm, ta.sigma.front() - 1.0);

    const subspace::SmoothedRestart keep =
        subspace::smooth_restart(adapter, g, subspace::SmoothingConfig{1.0, 1.0});
    worst_tau1 = std::max(
        worst_tau1, linalg::frobenius_norm(subspace::realized(keep.adapter) - old_product));

    const subspace::SmoothedRestart fresh =
        subspace::smooth_restart(adapter, g, subspace::SmoothingConfig{0.0, 0.0});
    const Matrix expected =
        -1.0 * (fresh.u_ema * (transpose(fresh.u_ema) * g * fresh.v_ema) * transpose(fresh.v_ema));
    worst_tau0 = std::max(
        worst_tau0, linalg::frobenius_norm(subspace::realized(fresh.adapter) - expected));
  }
  suite.checks.push_back(
      result("smooth-restart-identity", worst_core <= 1e-9, "max residual " + fmt(worst_core)));
  suite.checks.push_back(result("rotation-contraction", worst_tnorm <= 1e-8,
                                "max ||t_a||_2 - 1 = " + fmt(worst_tnorm)));
  suite.checks.push_back(
      result("smooth-restart-tau1-endpoint", worst_tau1 <= 1e-9, "max residual " + fmt(worst_tau1)));
  suite.checks.push_back(
      result("smooth-restart-tau0-endpoint", worst_tau0 <= 1e-9, "max residual " + fmt(worst_tau0)));

  // Absorb bookkeeping and the restart transition identity.
  {
    subspace::AnchoredState anchored =
        subspace::AnchoredState::from_origin(random_matrix(6, 5, 1500));
    Matrix sum(6, 5);
    const Matrix start = anchored.w_tilde;
    for (int it = 0; it < 10; ++it) {
      const Matrix inc = random_matrix(6, 5, 1510 + it);
      subspace::absorb(anchored, inc);
      sum += inc;
    }
    const double assoc = linalg::frobenius_norm(anchored.w_tilde - (start + sum));
    suite.checks.push_back(result("absorb-associativity",
                                  assoc <= 1e-9 && anchored.shadow_consistent(),
                                  "sequential vs single-sum drift " + fmt(assoc)));

    subspace::AdapterPair adapter;
    adapter.a = random_matrix(6, 2, 1600);
    adapter.b = random_matrix(2, 5, 1601);
    const Matrix before = anchored.w_tilde + subspace::realized(adapter);
    subspace::absorb(anchored, subspace::realized(adapter));
    adapter.a = Matrix(6, 2);
    adapter.b = Matrix(2, 5);
    const Matrix after = anchored.w_tilde + subspace::realized(adapter);
    const double preserved = linalg::frobenius_norm(after - before);
    suite.checks.push_back(result("restart-transition-preserves-w", preserved <= 1e-9,
                                  "realized drift across absorb " + fmt(preserved)));
  }

  // A closed warm-start gate is a no-op: two PESO-LoRA-T runs whose gate
  // patterns coincide must produce identical traces.
  {
    const problems::Objective quad = problems::quadratic_objective(10.0, 8, 2);
    driver::PesoConfig cfg;
    cfg.total_steps = 6;
    cfg.rank = 2;
    cfg.inner_lr.base_lr = 0.05;
    cfg.frequency_k = 7;  // gate fires only at k = 1
    const driver::RunResult a = driver::run_peso_lora_t(quad, cfg);
    cfg.frequency_k = 11;  // same gate pattern
    const driver::RunResult b = driver::run_peso_lora_t(quad, cfg);
    const bool equal = harness::trace_to_csv(a.trace, false) == harness::trace_to_csv(b.trace, false);
    suite.checks.push_back(result("warm-start-noop-gate", equal,
                                  equal ? "closed gates leave the trace bit-identical"
                                        : "traces diverged"));
  }
  return suite;
}

// ---------------------------------------------------------------------------

namespace {

// Deterministic descent setup: SGD exploitation at alpha = 1/L and restart
// step 1/gamma = 1/L on the quadratic (L = 2).
driver::PesoConfig descent_config(long frequency) {
  driver::PesoConfig cfg;
  cfg.frequency_k = frequency;
  cfg.total_steps = 2000;
  cfg.rank = 3;
  cfg.gamma = 2.0;
  cfg.inner_opt = driver::InnerOpt::Sgd;
  cfg.inner_lr.kind = optim::ScheduleKind::Constant;
  cfg.inner_lr.base_lr = 0.5;
  return cfg;
}

}  // namespace

SuiteResult check_descent() {
  SuiteResult suite{"descent", {}};
  const problems::Objective quad = problems::quadratic_objective(10.0, 16, 3);
  const double lipschitz = *quad.lipschitz_bound;
  for (long frequency : {1L, 5L, 20L}) {
    const driver::RunResult res = driver::run_peso_lora_r(quad, descent_config(frequency));
    const std::string tag = "K=" + std::to_string(frequency);
    suite.checks.push_back(result("descent-violations-" + tag,
                                  res.summary.descent_violations == 0,
                                  std::to_string(res.summary.descent_violations) +
                                      " violations over 2000 steps (bound 0)"));
    bool bracket_ok = true;
    double worst_gap = 0.0;
    for (const driver::RestartEvent& ev : res.restart_events) {
      const double lhs = ev.loss_before - ev.loss_after;
      const double rhs = ev.projected_grad_norm * ev.projected_grad_norm / (2.0 * lipschitz) - 1e-9;
      if (lhs < rhs) bracket_ok = false;
      worst_gap = std::max(worst_gap, rhs - lhs);
    }
    suite.checks.push_back(result("restart-bracket-" + tag, bracket_ok,
                                  std::to_string(res.restart_events.size()) +
                                      " restarts, worst bracket slack " + fmt(worst_gap)));
  }
  return suite;
}

SuiteResult check_theorem1() {
  SuiteResult suite{"theorem1", {}};
  const auto t0 = std::chrono::steady_clock::now();
  const problems::Objective quad = problems::quadratic_objective(10.0, 16, 3);

  double sum_min = 0.0;
  double sum_terminal_delta = 0.0;
  constexpr int kSeeds = 10;
  for (int seed = 0; seed < kSeeds; ++seed) {
    driver::PesoConfig cfg;
    cfg.frequency_k = 5;
    cfg.total_steps = 1500;
    cfg.rank = 3;
    cfg.gamma = 2.0;
    cfg.inner_opt = driver::InnerOpt::Sgd;
    cfg.inner_lr.kind = optim::ScheduleKind::Diminishing;
    cfg.inner_lr.base_lr = 0.25;
    optim::LrSchedule restart;
    restart.kind = optim::ScheduleKind::Diminishing;
    restart.base_lr = 0.5;  // eta_j = eta0 / j over restart ordinals
    cfg.restart_lr = restart;
    cfg.noise = problems::NoiseModel{1.0, static_cast<std::uint64_t>(seed)};
    cfg.seed = static_cast<std::uint64_t>(seed);

    const driver::RunResult res = driver::run_peso_lora_r(quad, cfg);
    double running_min = -1.0;
    for (const harness::StepRecord& rec : res.trace.steps)
      if (rec.restart && (running_min < 0.0 || rec.grad_norm < running_min))
        running_min = rec.grad_norm;
    sum_min += running_min;
    sum_terminal_delta += res.summary.terminal_delta.value_or(0.0);
  }
  const double mean_min = sum_min / kSeeds;
  const double mean_delta = sum_terminal_delta / kSeeds;
  const double elapsed = seconds_since(t0);
  const bool pass = mean_min <= mean_delta + 0.5;
  suite.checks.push_back(result(
      "grad-liminf-vs-delta", pass,
      "mean running-min ||G_k|| at restarts " + fmt(mean_min) + " vs terminal delta " +
          fmt(mean_delta) + " + 0.5 -> " + (pass ? "inequality holds" : "inequality violated")));
  suite.checks.push_back(
      result("theorem1-runtime", elapsed < 120.0, fmt(elapsed) + " s (bound 120 s)"));
  return suite;
}

SuiteResult check_exact_convergence() {
  SuiteResult suite{"exact-convergence", {}};
  const problems::Objective quad = problems::quadratic_objective(10.0, 16, 3);
  driver::PesoConfig cfg;
  cfg.frequency_k = 5;
  cfg.total_steps = 10000;
  cfg.rank = 3;
  cfg.gamma = 2.0;
  cfg.inner_opt = driver::InnerOpt::Sgd;
  cfg.inner_lr.kind = optim::ScheduleKind::Constant;
  cfg.inner_lr.base_lr = 0.25;
  const driver::RunResult res = driver::run_peso_lora_r(quad, cfg);
  suite.checks.push_back(result("grad-min-below-1e-6", res.summary.min_grad_norm < 1e-6,
                                "min ||G_k|| = " + fmt(res.summary.min_grad_norm) + " at step " +
                                    std::to_string(res.summary.argmin_step)));
  return suite;
}

SuiteResult check_schedule() {
  SuiteResult suite{"schedule", {}};

  optim::Beta2Warmup warmup;
  warmup.window = 100;
  warmup.restart_step = 40;
  const double at_start = optim::beta2_at(warmup, 40);
  const double at_end = optim::beta2_at(warmup, 140);
  const double at_mid = optim::beta2_at(warmup, 90);
  bool monotone = true;
  double prev = at_start;
  for (long t = 41; t <= 145; ++t) {
    const double b = optim::beta2_at(warmup, t);
    if (b < prev - 1e-15) monotone = false;
    prev = b;
  }
  suite.checks.push_back(result("beta2-endpoints",
                                at_start == 0.95 && at_end == 0.999,
                                "beta2(t_r) = " + fmt(at_start) + ", beta2(t_r+T) = " + fmt(at_end)));
  suite.checks.push_back(result("beta2-midpoint", std::abs(at_mid - 0.9745) <= 1e-12,
                                "beta2(t_r+T/2) = " + fmt(at_mid) + " (expect 0.9745)"));
  suite.checks.push_back(result("beta2-monotone", monotone, "non-decreasing over the window"));

  // Alignment contracts with identity transports.
  {
    optim::AdamState sa = optim::AdamState::for_shape(6, 3);
    optim::AdamState sb = optim::AdamState::for_shape(3, 8);
    sa.m = random_matrix(6, 3, 2000);
    const Matrix va = random_matrix(6, 3, 2001);
    sa.v = hadamard(va, va);
    sb.m = random_matrix(3, 8, 2002);
    const Matrix vb = random_matrix(3, 8, 2003);
    sb.v = hadamard(vb, vb);
    const Matrix ga = random_matrix(6, 3, 2004, 2.0);
    const Matrix gb = random_matrix(3, 8, 2005, 0.5);
    const Matrix eye = Matrix::identity(3);
    optim::align_states_after_restart(sa, sb, ga, gb, eye, eye, 33);

    const double ga_rms = linalg::rms_norm(ga);
    const double gb_rms = linalg::rms_norm(gb);
    const double err_va = std::abs(linalg::rms_norm(sa.v) - ga_rms * ga_rms) / (ga_rms * ga_rms);
    const double err_ma = std::abs(linalg::rms_norm(sa.m) - ga_rms) / ga_rms;
    const double err_vb = std::abs(linalg::rms_norm(sb.v) - gb_rms * gb_rms) / (gb_rms * gb_rms);
    const double err_mb = std::abs(linalg::rms_norm(sb.m) - gb_rms) / gb_rms;
    const double worst = std::max(std::max(err_va, err_ma), std::max(err_vb, err_mb));
    suite.checks.push_back(result("alignment-rms-contracts", worst <= 1e-10,
                                  "max relative rms error " + fmt(worst) + " (bound 1e-10)"));
    const bool rearmed = sa.beta2_warmup && sa.beta2_warmup->window == 33 &&
                         sa.beta2_warmup->restart_step == sa.step + 1;
    suite.checks.push_back(result("alignment-rearms-beta2", rearmed,
                                  rearmed ? "warm-up armed at the next update" : "warm-up missing"));

    optim::AdamState za = optim::AdamState::for_shape(4, 2);
    optim::AdamState zb = optim::AdamState::for_shape(2, 4);
    const optim::AlignmentReport report = optim::align_states_after_restart(
        za, zb, random_matrix(4, 2, 2010), random_matrix(2, 4, 2011), Matrix::identity(2),
        Matrix::identity(2), 10);
    const bool guarded = report.guarded() && linalg::frobenius_norm(za.m) == 0.0 &&
                         linalg::frobenius_norm(za.v) == 0.0;
    suite.checks.push_back(
        result("alignment-zero-state-guard", guarded, "zero states left untouched and flagged"));
  }

  // Diminishing schedule partial sums to N = 1e6.
  {
    optim::LrSchedule sched;
    sched.kind = optim::ScheduleKind::Diminishing;
    sched.base_lr = 1.0;
    double sum = 0.0, sum_sq = 0.0;
    constexpr long kN = 1000000;
    for (long t = 1; t <= kN; ++t) {
      const double lr = optim::lr_at(sched, t);
      sum += lr;
      sum_sq += lr * lr;
    }
    const double logn = std::log(static_cast<double>(kN));
    const bool grows = sum >= logn && sum <= logn + 1.0;
    const bool converges = sum_sq <= 1.6449340668482264 + 1e-6;  // pi^2/6
    suite.checks.push_back(result("diminishing-sums", grows && converges,
                                  "sum = " + fmt(sum) + " (log N = " + fmt(logn) +
                                      "), sum of squares = " + fmt(sum_sq) + " < pi^2/6"));
  }
  return suite;
}

SuiteResult check_harness() {
  SuiteResult suite{"harness", {}};

  // Trace CSV round trip, including empty delta cells.
  {
    harness::RunTrace trace;
    for (int i = 1; i <= 5; ++i) {
      harness::StepRecord rec;
      rec.step = i;
      rec.loss = 1.0 / i + 1e-17;
      rec.grad_norm = std::sqrt(2.0) * i;
      if (i % 2 == 1) rec.delta_k = 0.125 * i;
      rec.restart = i % 2 == 1;
      rec.descent_violation = i == 4;
      rec.inc_norm = 1e-3 * i;
      rec.wall_ms = 0.25 * i;
      trace.steps.push_back(rec);
    }
    std::istringstream is(harness::trace_to_csv(trace));
    const harness::RunTrace back = harness::parse_trace_csv(is);
    bool equal = back.steps.size() == trace.steps.size();
    for (std::size_t i = 0; equal && i < trace.steps.size(); ++i)
      equal = back.steps[i] == trace.steps[i];
    suite.checks.push_back(result("trace-roundtrip", equal,
                                  equal ? "parse(write(trace)) == trace" : "round trip mismatch"));
  }

  // Determinism: same config and seed, byte-identical trace (wall column is
  // informational and excluded).
  {
    const char* doc = R"({
      "problem": {"kind": "quadratic", "a": 10.0, "n": 12, "r_ones": 3},
      "method": {"kind": "peso-lora-r", "K": 4, "r": 2, "gamma": 2.0},
      "optimizer": {"kind": "adamw", "lr": 0.02},
      "noise": {"C": 0.5},
      "seed": 17,
      "total_steps": 60,
      "output": "unused.csv"
    })";
    const harness::RunConfig cfg = harness::parse_run_config(doc);
    const std::string first = harness::trace_to_csv(harness::execute_run(cfg).trace, false);
    const std::string second = harness::trace_to_csv(harness::execute_run(cfg).trace, false);
    suite.checks.push_back(result("trace-determinism", first == second,
                                  first == second ? "repeated runs are byte-identical"
                                                  : "repeated runs diverged"));
  }

  // Gate arithmetic: exploration fires iff (k-1) mod K == 0, and the restart
  // budget caps it.
  {
    const problems::Objective quad = problems::quadratic_objective(4.0, 6, 1);
    bool gate_ok = true;
    for (long frequency = 1; frequency <= 7 && gate_ok; ++frequency) {
      for (long total : {1L, 5L, 12L}) {
        driver::PesoConfig cfg;
        cfg.frequency_k = frequency;
        cfg.total_steps = total;
        cfg.rank = 2;
        cfg.inner_lr.base_lr = 0.01;
        const driver::RunResult res = driver::run_peso_lora_r(quad, cfg);
        std::vector<long> expected;
        for (long k = 1; k <= total; ++k)
          if ((k - 1) % frequency == 0) expected.push_back(k);
        if (res.restart_steps != expected) gate_ok = false;
        for (const harness::StepRecord& rec : res.trace.steps) {
          const bool should = (rec.step - 1) % frequency == 0;
          if (rec.restart != should) gate_ok = false;
        }
      }
    }
    driver::PesoConfig capped;
    capped.frequency_k = 2;
    capped.total_steps = 11;
    capped.rank = 2;
    capped.inner_lr.base_lr = 0.01;
    capped.max_restarts = 2;
    const driver::RunResult res = driver::run_peso_lora_r(quad, capped);
    if (res.restart_steps != std::vector<long>{1, 3}) gate_ok = false;
    suite.checks.push_back(result("gate-arithmetic", gate_ok,
                                  gate_ok ? "fires iff (k-1) mod K == 0; budget respected"
                                          : "gate pattern mismatch"));
  }

  // Config validation names the offending field.
  {
    bool named = false;
    try {
      harness::parse_run_config(R"({
        "problem": {"kind": "quadratic"},
        "method": {"kind": "lora", "K": 0, "r": 2},
        "optimizer": {"lr": 0.01},
        "total_steps": 10
      })");
    } catch (const std::invalid_argument& e) {
      named = std::string(e.what()).find("method.K") != std::string::npos;
    }
    bool unknown_rejected = false;
    try {
      harness::parse_run_config(R"({
        "problem": {"kind": "quadratic", "bogus": 1},
        "method": {"kind": "lora", "K": 1, "r": 2},
        "optimizer": {"lr": 0.01},
        "total_steps": 10
      })");
    } catch (const std::invalid_argument& e) {
      unknown_rejected = std::string(e.what()).find("problem.bogus") != std::string::npos;
    }
    suite.checks.push_back(result("config-validation", named && unknown_rejected,
                                  "K=0 and unknown keys rejected with field names"));
  }
  return suite;
}

std::vector<std::string> suite_names() {
  return {"linalg",   "grads",    "restart-identity", "subspace", "descent",
          "theorem1", "exact-convergence", "schedule", "harness"};
}

SuiteResult run_suite(const std::string& name, const FaultInjection& fault) {
  if (name == "linalg") return check_linalg(fault);
  if (name == "grads") return check_grads();
  if (name == "restart-identity") return check_restart_identity();
  if (name == "subspace") return check_subspace();
  if (name == "descent") return check_descent();
  if (name == "theorem1") return check_theorem1();
  if (name == "exact-convergence") return check_exact_convergence();
  if (name == "schedule") return check_schedule();
  if (name == "harness") return check_harness();
  throw std::invalid_argument("unknown suite '" + name + "'");
}

}  // namespace peso::checks
