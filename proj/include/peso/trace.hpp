// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace peso::harness {

/// One row of the run trace. delta_k is populated only at restart steps; an
/// absent value serializes as an empty CSV cell, never as zero.
struct StepRecord {
  long step = 0;
  double loss = 0.0;
  double grad_norm = 0.0;
  std::optional<double> delta_k;
  bool restart = false;
  bool descent_violation = false;
  double inc_norm = 0.0;
  double wall_ms = 0.0;
};

struct RunTrace {
  std::vector<StepRecord> steps;
};

struct TraceSummary {
  double min_grad_norm = 0.0;
  long argmin_step = 0;
  double final_loss = 0.0;
  std::optional<double> mean_delta;      // over restart steps
  std::optional<double> terminal_delta;  // last restart step
  long descent_violations = 0;
};

/// Convergence summary: running minimum of the gradient norm (the liminf
/// proxy), terminal loss, and the δ statistics over restart steps.
TraceSummary trace_summary(const RunTrace& trace);

inline constexpr const char* kTraceHeader =
    "step,loss,grad_norm,delta_k,restart,descent_violation,inc_norm,wall_ms";

/// Fixed-header CSV with 17-significant-digit floats. `include_wall=false`
/// drops the informational wall-time column (it is excluded from determinism
/// comparisons).
std::string trace_to_csv(const RunTrace& trace, bool include_wall = true);
void write_trace_csv(const RunTrace& trace, const std::string& path);
RunTrace parse_trace_csv(std::istream& is);
RunTrace parse_trace_csv_file(const std::string& path);

bool operator==(const StepRecord& a, const StepRecord& b);

}  // namespace peso::harness
