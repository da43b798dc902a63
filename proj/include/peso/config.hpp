// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>

#include "peso/driver.hpp"

namespace peso::harness {

enum class ProblemKind { Quadratic, Mlp };
enum class MethodKind { Lora, PesoLoraR, PesoLoraT, Galore };

struct ProblemConfig {
  ProblemKind kind = ProblemKind::Quadratic;
  // quadratic block
  double a = 10.0;
  std::size_t n = 16;
  std::size_t r_ones = 4;  // number of ones in the target diagonal (r+1)
  // mlp block
  problems::MlpConfig mlp;
};

/// One reproducibility artifact: problem, method, optimizer, noise and seed
/// in a single document. Unknown keys are rejected at load time.
struct RunConfig {
  ProblemConfig problem;
  MethodKind method = MethodKind::PesoLoraR;
  driver::PesoConfig peso;
  std::uint64_t seed = 0;
  std::string output = "trace.csv";
  bool subspace_log = false;
  std::string source_path;  // file it came from, used for report labels
};

/// Parse + validate. Throws std::invalid_argument naming the offending field.
RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);

/// Apply a seed override (CLI --seed): updates both the run seed and the
/// noise seed.
void override_seed(RunConfig& config, std::uint64_t seed);

problems::Objective build_objective(const ProblemConfig& problem);
bool same_problem(const ProblemConfig& x, const ProblemConfig& y);

driver::RunResult execute_run(const RunConfig& config);

/// Problem fixtures (target matrix / dataset) as matrix CSVs under dir.
void dump_problem_fixtures(const ProblemConfig& problem, const std::string& dir);

/// Sidecar CSV with per-restart bases and singular values.
void write_subspace_csv(const std::vector<driver::SubspaceSnapshot>& snapshots,
                        const std::string& path);

std::string method_name(MethodKind kind);

}  // namespace peso::harness
