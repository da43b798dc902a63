// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "peso/checks.hpp"
#include "peso/config.hpp"
#include "peso/trace.hpp"

using namespace peso;

namespace {

const char* kMinimalConfig = R"({
  "problem": {"kind": "quadratic", "a": 10.0, "n": 12, "r_ones": 3},
  "method": {"kind": "peso-lora-r", "K": 4, "r": 2, "gamma": 2.0},
  "optimizer": {"kind": "adamw", "lr": 0.02},
  "seed": 7,
  "total_steps": 30,
  "output": "trace.csv"
})";

}  // namespace

TEST_CASE("config parsing: happy path and defaults") {
  const harness::RunConfig cfg = harness::parse_run_config(kMinimalConfig);
  CHECK(cfg.method == harness::MethodKind::PesoLoraR);
  CHECK(cfg.peso.frequency_k == 4);
  CHECK(cfg.peso.rank == 2);
  CHECK(cfg.peso.gamma == 2.0);
  CHECK(cfg.peso.total_steps == 30);
  CHECK(cfg.peso.adam.beta1 == 0.9);
  CHECK(cfg.peso.adam.beta2 == 0.999);
  CHECK_FALSE(cfg.peso.smoothing.has_value());
  CHECK_FALSE(cfg.peso.noise.has_value());
  CHECK(cfg.seed == 7);
  CHECK(cfg.output == "trace.csv");
}

TEST_CASE("config parsing: rejections name the offending field") {
  auto expect_message = [](const char* doc, const char* needle) {
    try {
      harness::parse_run_config(doc);
      FAIL_CHECK("expected rejection containing '" << needle << "'");
    } catch (const std::invalid_argument& e) {
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
  };
  expect_message(R"({
    "problem": {"kind": "quadratic"},
    "method": {"kind": "lora", "K": 0, "r": 2},
    "optimizer": {"lr": 0.01},
    "total_steps": 10})",
                 "method.K");
  expect_message(R"({
    "problem": {"kind": "quadratic", "mystery": 3},
    "method": {"kind": "lora", "K": 1, "r": 2},
    "optimizer": {"lr": 0.01},
    "total_steps": 10})",
                 "problem.mystery");
  expect_message(R"({
    "problem": {"kind": "quadratic"},
    "method": {"kind": "lora", "K": 1, "r": 2},
    "optimizer": {"lr": 0.01, "beta1": 1.5},
    "total_steps": 10})",
                 "optimizer.beta1");
  expect_message(R"({
    "problem": {"kind": "quadratic"},
    "optimizer": {"lr": 0.01},
    "total_steps": 10})",
                 "method");
}

TEST_CASE("config parsing: noise and smoothing blocks") {
  const char* doc = R"({
    "problem": {"kind": "quadratic", "a": 10.0, "n": 16, "r_ones": 4},
    "method": {"kind": "peso-lora-r", "K": 20, "r": 3, "gamma": 2.0,
               "smoothing": true, "tau1": 0.8, "tau2": 0.7, "alignment": true,
               "restart_schedule": {"kind": "diminishing", "eta0": 0.5}},
    "optimizer": {"kind": "sgd", "lr": 0.25, "schedule": "diminishing"},
    "noise": {"C": 1.0},
    "seed": 3,
    "total_steps": 100
  })";
  const harness::RunConfig cfg = harness::parse_run_config(doc);
  REQUIRE(cfg.peso.smoothing.has_value());
  CHECK(cfg.peso.smoothing->tau1 == 0.8);
  CHECK(cfg.peso.smoothing->tau2 == 0.7);
  CHECK(cfg.peso.alignment);
  REQUIRE(cfg.peso.noise.has_value());
  CHECK(cfg.peso.noise->variance_bound == 1.0);
  CHECK(cfg.peso.noise->seed == 3);  // inherits the run seed
  REQUIRE(cfg.peso.restart_lr.has_value());
  CHECK(cfg.peso.restart_lr->kind == optim::ScheduleKind::Diminishing);
  CHECK(cfg.peso.inner_opt == driver::InnerOpt::Sgd);

  harness::RunConfig reseeded = cfg;
  harness::override_seed(reseeded, 99);
  CHECK(reseeded.peso.seed == 99);
  CHECK(reseeded.peso.noise->seed == 99);
}

TEST_CASE("trace csv round trip is exact") {
  harness::RunTrace trace;
  for (int i = 1; i <= 7; ++i) {
    harness::StepRecord rec;
    rec.step = i;
    rec.loss = std::pow(0.1, i) + 1.0 / 3.0;
    rec.grad_norm = std::sqrt(2.0) / i;
    if (i % 3 == 1) rec.delta_k = 0.7251 * i;
    rec.restart = i % 3 == 1;
    rec.descent_violation = i == 5;
    rec.inc_norm = 1e-9 * i;
    rec.wall_ms = 0.125 * i;
    trace.steps.push_back(rec);
  }
  std::istringstream is(harness::trace_to_csv(trace));
  const harness::RunTrace back = harness::parse_trace_csv(is);
  REQUIRE(back.steps.size() == trace.steps.size());
  for (std::size_t i = 0; i < trace.steps.size(); ++i) CHECK(back.steps[i] == trace.steps[i]);
}

TEST_CASE("trace summary") {
  SUBCASE("empty trace rejected") {
    CHECK_THROWS_AS(harness::trace_summary(harness::RunTrace{}), std::invalid_argument);
  }
  SUBCASE("single-step trace reproduces that step") {
    harness::RunTrace trace;
    harness::StepRecord rec;
    rec.step = 1;
    rec.loss = 4.0;
    rec.grad_norm = 2.0;
    rec.delta_k = 0.5;
    trace.steps.push_back(rec);
    const harness::TraceSummary s = harness::trace_summary(trace);
    CHECK(s.min_grad_norm == 2.0);
    CHECK(s.argmin_step == 1);
    CHECK(s.final_loss == 4.0);
    CHECK(*s.mean_delta == 0.5);
    CHECK(*s.terminal_delta == 0.5);
  }
  SUBCASE("monotone trace puts the argmin at the last step") {
    harness::RunTrace trace;
    for (int i = 1; i <= 9; ++i) {
      harness::StepRecord rec;
      rec.step = i;
      rec.loss = 10.0 - i;
      rec.grad_norm = 5.0 / i;
      trace.steps.push_back(rec);
    }
    const harness::TraceSummary s = harness::trace_summary(trace);
    CHECK(s.argmin_step == 9);
    CHECK(s.final_loss == 1.0);
  }
  SUBCASE("recorded fixture matches independently computed values") {
    // Fixture: steps 1..5 with hand-computed summary quantities.
    harness::RunTrace trace;
    const double losses[] = {8.0, 5.0, 6.0, 2.0, 2.5};
    const double grads[] = {4.0, 3.0, 3.5, 1.0, 1.5};
    for (int i = 0; i < 5; ++i) {
      harness::StepRecord rec;
      rec.step = i + 1;
      rec.loss = losses[i];
      rec.grad_norm = grads[i];
      rec.descent_violation = i == 2 || i == 4;
      if (i == 0) rec.delta_k = 0.4;
      if (i == 3) rec.delta_k = 0.2;
      rec.restart = rec.delta_k.has_value();
      trace.steps.push_back(rec);
    }
    const harness::TraceSummary s = harness::trace_summary(trace);
    CHECK(s.min_grad_norm == 1.0);
    CHECK(s.argmin_step == 4);
    CHECK(s.final_loss == 2.5);
    CHECK(*s.mean_delta == doctest::Approx(0.3));
    CHECK(*s.terminal_delta == 0.2);
    CHECK(s.descent_violations == 2);
  }
}

TEST_CASE("execute_run dispatches every method kind") {
  for (const char* kind : {"lora", "peso-lora-r", "peso-lora-t", "galore"}) {
    std::string doc = R"({
      "problem": {"kind": "quadratic", "a": 4.0, "n": 8, "r_ones": 2},
      "method": {"kind": ")" + std::string(kind) + R"(", "K": 3, "r": 2},
      "optimizer": {"kind": "adamw", "lr": 0.01},
      "seed": 1,
      "total_steps": 12
    })";
    const harness::RunConfig cfg = harness::parse_run_config(doc);
    const driver::RunResult res = harness::execute_run(cfg);
    CHECK(res.trace.steps.size() == 12);
  }
}

TEST_CASE("muon exploration dispatches through the config surface") {
  const harness::RunConfig cfg = harness::parse_run_config(R"({
    "problem": {"kind": "quadratic", "a": 4.0, "n": 8, "r_ones": 2},
    "method": {"kind": "peso-lora-r", "K": 4, "r": 2, "exploration": "muon",
               "restart_schedule": {"kind": "constant", "eta0": 0.3}},
    "optimizer": {"lr": 0.02},
    "seed": 1,
    "total_steps": 20
  })");
  CHECK(cfg.peso.exploration == driver::Exploration::MuonRestart);
  const driver::RunResult res = harness::execute_run(cfg);
  CHECK(res.restart_steps == std::vector<long>{1, 5, 9, 13, 17});
  CHECK(res.summary.final_loss < res.trace.steps.front().loss);
}

TEST_CASE("determinism: identical config and seed give identical trace bytes") {
  const harness::RunConfig cfg = harness::parse_run_config(R"({
    "problem": {"kind": "quadratic", "a": 10.0, "n": 10, "r_ones": 3},
    "method": {"kind": "peso-lora-r", "K": 5, "r": 2, "gamma": 2.0},
    "optimizer": {"lr": 0.02},
    "noise": {"C": 0.5},
    "seed": 21,
    "total_steps": 40
  })");
  const std::string a = harness::trace_to_csv(harness::execute_run(cfg).trace, false);
  const std::string b = harness::trace_to_csv(harness::execute_run(cfg).trace, false);
  CHECK(a == b);

  harness::RunConfig other = cfg;
  harness::override_seed(other, 22);
  const std::string c = harness::trace_to_csv(harness::execute_run(other).trace, false);
  CHECK(a != c);
}

TEST_CASE("mlp problem block round trips through the harness") {
  const harness::RunConfig cfg = harness::parse_run_config(R"({
    "problem": {"kind": "mlp", "n_in": 5, "n_hidden": 6, "n_out": 3, "n_samples": 12, "data_seed": 4},
    "method": {"kind": "peso-lora-r", "K": 4, "r": 2},
    "optimizer": {"lr": 0.02},
    "seed": 2,
    "total_steps": 15
  })");
  const driver::RunResult res = harness::execute_run(cfg);
  CHECK(res.trace.steps.size() == 15);
  CHECK(res.summary.final_loss < res.trace.steps.front().loss);
  CHECK(harness::same_problem(cfg.problem, cfg.problem));
  harness::RunConfig other = cfg;
  other.problem.mlp.seed = 5;
  CHECK_FALSE(harness::same_problem(cfg.problem, other.problem));
}

TEST_CASE("fault injection makes the linalg suite fail") {
  checks::FaultInjection fault;
  fault.svd_sigma_perturb = 1e-6;
  const checks::SuiteResult broken = checks::run_suite("linalg", fault);
  CHECK_FALSE(broken.passed());
  bool reconstruction_failed = false;
  for (const auto& check : broken.checks)
    if (check.name == "svd-reconstruction" && !check.pass) reconstruction_failed = true;
  CHECK(reconstruction_failed);
}

TEST_CASE("unknown suite is rejected") {
  CHECK_THROWS_AS(checks::run_suite("no-such-suite"), std::invalid_argument);
}
