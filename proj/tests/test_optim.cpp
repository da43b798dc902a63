// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <random>

#include "oracles.hpp"
#include "peso/linalg.hpp"
#include "peso/optim.hpp"

using namespace peso;
using peso::linalg::Matrix;

TEST_CASE("adamw_step basics") {
  SUBCASE("zero gradient leaves the parameter unchanged") {
    optim::AdamState state = optim::AdamState::for_shape(3, 2);
    Matrix param(3, 2, 1.5);
    optim::adamw_step(state, param, Matrix(3, 2), 0.1);
    CHECK(linalg::frobenius_norm(param - Matrix(3, 2, 1.5)) == 0.0);
    CHECK(state.step == 1);
  }
  SUBCASE("first step on an all-ones gradient cancels bias correction") {
    optim::AdamState state = optim::AdamState::for_shape(2, 2);
    Matrix param(2, 2);
    optim::adamw_step(state, param, Matrix(2, 2, 1.0), 0.05);
    const double expected = -0.05 / (1.0 + state.hyper.eps);
    for (double v : param.values()) CHECK(v == doctest::Approx(expected).epsilon(1e-12));
  }
  SUBCASE("ten-step scalar trajectory matches the reference implementation") {
    optim::AdamState state = optim::AdamState::for_shape(1, 1);
    state.hyper.weight_decay = 0.01;
    oracles::ScalarAdamRef ref;
    ref.weight_decay = 0.01;
    Matrix param(1, 1, 2.0);
    double ref_param = 2.0;
    for (int step = 0; step < 10; ++step) {
      const double grad = 3.0 * ref_param;  // quadratic (3/2) w^2
      Matrix g(1, 1, grad);
      optim::adamw_step(state, param, g, 0.1);
      ref_param = ref.step(ref_param, grad, 0.1);
      CHECK(param(0, 0) == doctest::Approx(ref_param).epsilon(1e-12));
    }
  }
  SUBCASE("non-finite gradient rejected without touching state") {
    optim::AdamState state = optim::AdamState::for_shape(1, 1);
    Matrix param(1, 1, 1.0);
    Matrix g(1, 1);
    g(0, 0) = std::nan("");
    CHECK_THROWS_AS(optim::adamw_step(state, param, g, 0.1), std::invalid_argument);
    CHECK(state.step == 0);
    CHECK(linalg::frobenius_norm(state.m) == 0.0);
    CHECK(param(0, 0) == 1.0);
  }
  SUBCASE("constant gradient: bias-corrected momentum equals it, raw momentum converges at rate beta1") {
    optim::AdamState state = optim::AdamState::for_shape(1, 1);
    Matrix param(1, 1);
    const double g = 0.7;
    double prev_gap = g;
    for (int step = 1; step <= 30; ++step) {
      optim::adamw_step(state, param, Matrix(1, 1, g), 1e-3);
      const double m_hat = state.m(0, 0) / (1.0 - std::pow(0.9, step));
      CHECK(m_hat == doctest::Approx(g).epsilon(1e-12));
      const double gap = std::abs(state.m(0, 0) - g);
      if (step > 1) CHECK(gap == doctest::Approx(prev_gap * 0.9).epsilon(1e-9));
      prev_gap = gap;
    }
  }
}

TEST_CASE("sgd_step") {
  Matrix param(2, 2, 1.0);
  optim::sgd_step(param, Matrix(2, 2), 0.3);
  CHECK(linalg::frobenius_norm(param - Matrix(2, 2, 1.0)) == 0.0);

  SUBCASE("descent at 1/L on the quadratic") {
    // l(w) = ||w - t||^2, L = 2, alpha = 1/2 jumps to the optimum.
    Matrix w(2, 2, 3.0);
    const Matrix target(2, 2, 1.0);
    const Matrix grad = 2.0 * (w - target);
    optim::sgd_step(w, grad, 0.5);
    CHECK(linalg::frobenius_norm(w - target) < 1e-14);
  }
  SUBCASE("closed-form geometric decay") {
    // l(w) = (a/2) w^2, gradient a*w: w_k = w0 (1 - lr*a)^k.
    const double a = 3.0, lr = 0.2, w0 = 1.7;
    Matrix w(1, 1, w0);
    for (int k = 1; k <= 20; ++k) {
      optim::sgd_step(w, Matrix(1, 1, a * w(0, 0)), lr);
      CHECK(w(0, 0) == doctest::Approx(w0 * std::pow(1.0 - lr * a, k)).epsilon(1e-12));
    }
  }
  SUBCASE("non-finite gradient rejected") {
    Matrix w(1, 1, 1.0);
    Matrix g(1, 1);
    g(0, 0) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(optim::sgd_step(w, g, 0.1), std::invalid_argument);
  }
}

TEST_CASE("beta2 warm-up schedule") {
  optim::Beta2Warmup warmup;
  warmup.window = 10;
  warmup.restart_step = 100;

  CHECK(optim::beta2_at(warmup, 100) == 0.95);
  CHECK(optim::beta2_at(warmup, 110) == 0.999);
  CHECK(optim::beta2_at(warmup, 200) == 0.999);
  CHECK(optim::beta2_at(warmup, 105) == doctest::Approx(0.9745).epsilon(1e-12));

  double prev = 0.0;
  for (long t = 100; t <= 115; ++t) {
    const double b = optim::beta2_at(warmup, t);
    CHECK(b >= prev);
    prev = b;
  }
  CHECK_THROWS_AS(optim::beta2_at(warmup, 99), std::invalid_argument);

  optim::Beta2Warmup degenerate;
  degenerate.window = 0;
  degenerate.restart_step = 5;
  CHECK(optim::beta2_at(degenerate, 5) == 0.999);
}

TEST_CASE("learning-rate schedules") {
  optim::LrSchedule constant;
  constant.base_lr = 0.3;
  CHECK(optim::lr_at(constant, 1) == 0.3);
  CHECK(optim::lr_at(constant, 999) == 0.3);

  optim::LrSchedule dim;
  dim.kind = optim::ScheduleKind::Diminishing;
  dim.base_lr = 0.5;
  CHECK(optim::lr_at(dim, 1) == 0.5);
  CHECK(optim::lr_at(dim, 10) == doctest::Approx(0.05));
  double sum = 0.0, sum_sq = 0.0;
  for (long t = 1; t <= 100000; ++t) {
    const double lr = optim::lr_at(dim, t);
    sum += lr;
    sum_sq += lr * lr;
  }
  CHECK(sum >= 0.5 * std::log(100000.0));
  CHECK(sum <= 0.5 * (std::log(100000.0) + 1.0));
  CHECK(sum_sq < 0.25 * 1.6449340668482264 + 1e-6);

  optim::LrSchedule cosine;
  cosine.kind = optim::ScheduleKind::CosineWarmup;
  cosine.base_lr = 1.0;
  cosine.warmup_ratio = 0.1;
  cosine.total_steps = 100;
  CHECK(optim::lr_at(cosine, 10) == doctest::Approx(1.0));  // end of warm-up
  CHECK(optim::lr_at(cosine, 5) == doctest::Approx(0.5));
  CHECK(optim::lr_at(cosine, 100) == 0.0);
  CHECK(optim::lr_at(cosine, 55) == doctest::Approx(0.5));  // cosine midpoint
  CHECK_THROWS_AS(optim::lr_at(cosine, 0), std::invalid_argument);
}

TEST_CASE("align_states_after_restart") {
  SUBCASE("velocity scale forced by the formula") {
    optim::AdamState sa = optim::AdamState::for_shape(2, 2);
    optim::AdamState sb = optim::AdamState::for_shape(2, 2);
    sa.v = Matrix(2, 2, 1.0);                 // rms(v) = 1
    sa.m = Matrix(2, 2, 0.5);
    const Matrix ga(2, 2, 2.0);               // rms(g) = 2
    sb.v = Matrix(2, 2, 4.0);
    sb.m = Matrix(2, 2, 1.0);
    const Matrix gb(2, 2, 1.0);
    const Matrix eye = Matrix::identity(2);
    const optim::AlignmentReport report =
        optim::align_states_after_restart(sa, sb, ga, gb, eye, eye, 12);
    CHECK(report.v_a_scaled);
    CHECK(linalg::rms_norm(sa.v) == doctest::Approx(4.0).epsilon(1e-12));  // rms(g)^2
    CHECK(linalg::rms_norm(sa.m) == doctest::Approx(2.0).epsilon(1e-12));  // rms(g)
    CHECK(linalg::rms_norm(sb.v) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sa.beta2_warmup.has_value());
    CHECK(sa.beta2_warmup->window == 12);
    CHECK(sa.beta2_warmup->restart_step == sa.step + 1);
    CHECK(sa.beta2_warmup->beta2_min == 0.95);
  }
  SUBCASE("zero states take the guard path") {
    optim::AdamState sa = optim::AdamState::for_shape(2, 2);
    optim::AdamState sb = optim::AdamState::for_shape(2, 2);
    const Matrix g(2, 2, 1.0);
    const Matrix eye = Matrix::identity(2);
    const optim::AlignmentReport report =
        optim::align_states_after_restart(sa, sb, g, g, eye, eye, 5);
    CHECK(report.guarded());
    CHECK(linalg::frobenius_norm(sa.m) == 0.0);
    CHECK(linalg::frobenius_norm(sa.v) == 0.0);
  }
  SUBCASE("identity rotation leaves momentum direction unchanged; general t rotates") {
    std::mt19937_64 gen(12);
    optim::AdamState sa = optim::AdamState::for_shape(4, 2);
    optim::AdamState sb = optim::AdamState::for_shape(2, 4);
    sa.m = oracles::random_matrix(gen, 4, 2);
    const Matrix va = oracles::random_matrix(gen, 4, 2);
    sa.v = hadamard(va, va);
    sb.m = oracles::random_matrix(gen, 2, 4);
    const Matrix vb = oracles::random_matrix(gen, 2, 4);
    sb.v = hadamard(vb, vb);
    const Matrix ga = oracles::random_matrix(gen, 4, 2);
    const Matrix gb = oracles::random_matrix(gen, 2, 4);

    optim::AdamState sa2 = sa, sb2 = sb;
    const Matrix eye = Matrix::identity(2);
    optim::align_states_after_restart(sa, sb, ga, gb, eye, eye, 3);
    const Matrix scaled_m = sa.m;  // identity transport: scaling only

    const Matrix rot = peso::linalg::qr_thin(oracles::random_matrix(gen, 2, 2)).q;
    optim::align_states_after_restart(sa2, sb2, ga, gb, rot, rot, 3);
    CHECK(linalg::frobenius_norm(sa2.m - scaled_m * rot) < 1e-12);
  }
}

TEST_CASE("adam state checkpoint round trip") {
  std::mt19937_64 gen(13);
  optim::AdamState state = optim::AdamState::for_shape(3, 4);
  state.m = oracles::random_matrix(gen, 3, 4);
  const Matrix vdraw = oracles::random_matrix(gen, 3, 4);
  state.v = hadamard(vdraw, vdraw);
  state.step = 17;
  state.hyper.weight_decay = 0.02;
  optim::Beta2Warmup warmup;
  warmup.window = 9;
  warmup.restart_step = 14;
  state.beta2_warmup = warmup;

  const std::string path = "adam_state_roundtrip.csv";
  optim::save_adam_state(state, path);
  optim::AdamState back = optim::load_adam_state(path);
  std::remove(path.c_str());

  CHECK(back.step == 17);
  CHECK(back.hyper.weight_decay == 0.02);
  REQUIRE(back.beta2_warmup.has_value());
  CHECK(back.beta2_warmup->window == 9);
  CHECK(linalg::frobenius_norm(back.m - state.m) == 0.0);
  CHECK(linalg::frobenius_norm(back.v - state.v) == 0.0);

  // Stepping the restored state matches stepping the original.
  Matrix p1(3, 4, 1.0), p2(3, 4, 1.0);
  const Matrix g = oracles::random_matrix(gen, 3, 4);
  optim::adamw_step(state, p1, g, 0.01);
  optim::adamw_step(back, p2, g, 0.01);
  CHECK(linalg::frobenius_norm(p1 - p2) == 0.0);
}
