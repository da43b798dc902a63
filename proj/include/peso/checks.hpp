// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

namespace peso::checks {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;  // measured bounds, human readable
};

struct SuiteResult {
  std::string suite;
  std::vector<CheckResult> checks;
  bool passed() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
};

/// Test-harness fault injection: a nonzero perturbation is added to the
/// leading singular value inside the linalg suite, which must then fail.
struct FaultInjection {
  double svd_sigma_perturb = 0.0;
};

SuiteResult check_linalg(const FaultInjection& fault = {});
SuiteResult check_grads();
SuiteResult check_restart_identity();
SuiteResult check_subspace();
SuiteResult check_descent();
SuiteResult check_theorem1();
SuiteResult check_exact_convergence();
SuiteResult check_schedule();
SuiteResult check_harness();

std::vector<std::string> suite_names();
SuiteResult run_suite(const std::string& name, const FaultInjection& fault = {});

}  // namespace peso::checks
