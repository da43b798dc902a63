// SPDX-License-Identifier: Apache-2.0

#include "peso/trace.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace peso::harness {

TraceSummary trace_summary(const RunTrace& trace) {
  if (trace.steps.empty()) throw std::invalid_argument("trace_summary: empty trace");
  TraceSummary s;
  s.min_grad_norm = trace.steps.front().grad_norm;
  s.argmin_step = trace.steps.front().step;
  double delta_sum = 0.0;
  long delta_count = 0;
  for (const StepRecord& rec : trace.steps) {
    if (rec.grad_norm < s.min_grad_norm) {
      s.min_grad_norm = rec.grad_norm;
      s.argmin_step = rec.step;
    }
    if (rec.delta_k) {
      delta_sum += *rec.delta_k;
      ++delta_count;
      s.terminal_delta = *rec.delta_k;
    }
    if (rec.descent_violation) ++s.descent_violations;
  }
  s.final_loss = trace.steps.back().loss;
  if (delta_count > 0) s.mean_delta = delta_sum / static_cast<double>(delta_count);
  return s;
}

namespace {

void format_double(std::ostream& os, double v) {
  std::ostringstream tmp;
  tmp.precision(17);
  tmp << v;
  os << tmp.str();
}

}  // namespace

std::string trace_to_csv(const RunTrace& trace, bool include_wall) {
  std::ostringstream os;
  if (include_wall) {
    os << kTraceHeader << "\n";
  } else {
    os << "step,loss,grad_norm,delta_k,restart,descent_violation,inc_norm\n";
  }
  for (const StepRecord& rec : trace.steps) {
    os << rec.step << ",";
    format_double(os, rec.loss);
    os << ",";
    format_double(os, rec.grad_norm);
    os << ",";
    if (rec.delta_k) format_double(os, *rec.delta_k);
    os << "," << (rec.restart ? 1 : 0) << "," << (rec.descent_violation ? 1 : 0) << ",";
    format_double(os, rec.inc_norm);
    if (include_wall) {
      os << ",";
      format_double(os, rec.wall_ms);
    }
    os << "\n";
  }
  return os.str();
}

void write_trace_csv(const RunTrace& trace, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for write: " + path);
  os << trace_to_csv(trace);
}

RunTrace parse_trace_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("trace csv: missing header");
  if (line != kTraceHeader) throw std::runtime_error("trace csv: unexpected header '" + line + "'");
  RunTrace trace;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    StepRecord rec;
    auto next = [&](const char* field) {
      if (!std::getline(ls, cell, ',')) throw std::runtime_error(std::string("trace csv: missing ") + field);
      return cell;
    };
    rec.step = std::strtol(next("step").c_str(), nullptr, 10);
    rec.loss = std::strtod(next("loss").c_str(), nullptr);
    rec.grad_norm = std::strtod(next("grad_norm").c_str(), nullptr);
    const std::string delta = next("delta_k");
    if (!delta.empty()) rec.delta_k = std::strtod(delta.c_str(), nullptr);
    rec.restart = next("restart") == "1";
    rec.descent_violation = next("descent_violation") == "1";
    rec.inc_norm = std::strtod(next("inc_norm").c_str(), nullptr);
    rec.wall_ms = std::strtod(next("wall_ms").c_str(), nullptr);
    trace.steps.push_back(rec);
  }
  return trace;
}

RunTrace parse_trace_csv_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open for read: " + path);
  return parse_trace_csv(is);
}

bool operator==(const StepRecord& a, const StepRecord& b) {
  return a.step == b.step && a.loss == b.loss && a.grad_norm == b.grad_norm &&
         a.delta_k == b.delta_k && a.restart == b.restart &&
         a.descent_violation == b.descent_violation && a.inc_norm == b.inc_norm &&
         a.wall_ms == b.wall_ms;
}

}  // namespace peso::harness
