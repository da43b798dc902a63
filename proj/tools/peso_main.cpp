// SPDX-License-Identifier: Apache-2.0
//
// Benchmark CLI: run a configured method, compare methods on one problem,
// execute the invariant-check suites, or sweep a parameter grid.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "peso/checks.hpp"
#include "peso/config.hpp"
#include "peso/driver.hpp"
#include "peso/trace.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitConfigError = 2;
constexpr int kExitNumericalError = 3;

std::string fmt17(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

fs::path resolve_output(const std::string& configured, const std::string& out_dir) {
  if (out_dir.empty()) return fs::path(configured);
  return fs::path(out_dir) / fs::path(configured).filename();
}

void print_summary_line(const peso::driver::RunResult& result) {
  std::cout << "final_loss=" << fmt17(result.summary.final_loss)
            << " min_grad_norm=" << fmt17(result.summary.min_grad_norm)
            << " restarts=" << result.restart_steps.size() << "\n";
}

int cmd_run(const std::string& config_path, const std::string& out_dir,
            const std::optional<std::uint64_t>& seed, const std::string& dump_dir) {
  peso::harness::RunConfig config;
  try {
    config = peso::harness::load_run_config(config_path);
    if (seed) peso::harness::override_seed(config, *seed);
    if (!dump_dir.empty()) peso::harness::dump_problem_fixtures(config.problem, dump_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  }

  const fs::path trace_path = resolve_output(config.output, out_dir);
  try {
    const peso::driver::RunResult result = peso::harness::execute_run(config);
    if (trace_path.has_parent_path()) fs::create_directories(trace_path.parent_path());
    peso::harness::write_trace_csv(result.trace, trace_path.string());
    if (config.subspace_log)
      peso::harness::write_subspace_csv(result.snapshots, trace_path.string() + ".subspace.csv");
    print_summary_line(result);
    return kExitOk;
  } catch (const peso::driver::run_aborted& e) {
    if (trace_path.has_parent_path()) fs::create_directories(trace_path.parent_path());
    peso::harness::write_trace_csv(e.partial.trace, trace_path.string());
    std::cerr << "error: " << e.what() << " (partial trace flushed to " << trace_path.string()
              << ")\n";
    return kExitNumericalError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  }
}

int cmd_compare(const std::vector<std::string>& config_paths, const std::string& out_dir,
                const std::optional<std::uint64_t>& seed) {
  if (config_paths.size() < 2) {
    std::cerr << "error: compare needs at least two --config arguments\n";
    return kExitConfigError;
  }
  std::vector<peso::harness::RunConfig> configs;
  try {
    for (const std::string& path : config_paths) {
      configs.push_back(peso::harness::load_run_config(path));
      if (seed) peso::harness::override_seed(configs.back(), *seed);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  }
  for (std::size_t i = 1; i < configs.size(); ++i) {
    if (!peso::harness::same_problem(configs[0].problem, configs[i].problem)) {
      std::cerr << "error: configs disagree on the problem block ('" << config_paths[0]
                << "' vs '" << config_paths[i] << "')\n";
      return kExitConfigError;
    }
  }

  std::vector<peso::driver::RunResult> results;
  std::vector<std::string> labels;
  try {
    for (const auto& config : configs) {
      results.push_back(peso::harness::execute_run(config));
      labels.push_back(fs::path(config.source_path).stem().string());
    }
  } catch (const peso::driver::run_aborted& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumericalError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  }

  // Aligned per-step loss columns, header order = argument order.
  const fs::path csv_path = fs::path(out_dir.empty() ? "." : out_dir) / "compare.csv";
  fs::create_directories(csv_path.parent_path());
  std::ofstream os(csv_path);
  os << "step";
  for (const std::string& label : labels) os << ",loss_" << label;
  os << "\n";
  std::size_t longest = 0;
  for (const auto& r : results) longest = std::max(longest, r.trace.steps.size());
  for (std::size_t i = 0; i < longest; ++i) {
    os << (i + 1);
    for (const auto& r : results) {
      os << ",";
      if (i < r.trace.steps.size()) os << fmt17(r.trace.steps[i].loss);
    }
    os << "\n";
  }
  os.close();

  std::cout << "wrote " << csv_path.string() << "\n";
  if (configs[0].problem.kind == peso::harness::ProblemKind::Quadratic) {
    const double floor = configs[0].problem.a * configs[0].problem.a;
    std::cout << "quadratic problem: best rank-limited loss floor a^2 = " << fmt17(floor) << "\n";
    for (std::size_t i = 0; i < results.size(); ++i) {
      std::cout << labels[i] << ": terminal_loss=" << fmt17(results[i].summary.final_loss)
                << " vs_floor=" << fmt17(results[i].summary.final_loss - floor) << "\n";
    }
  } else {
    for (std::size_t i = 0; i < results.size(); ++i)
      std::cout << labels[i] << ": terminal_loss=" << fmt17(results[i].summary.final_loss) << "\n";
  }
  return kExitOk;
}

int cmd_check(const std::string& suite, const std::string& out_dir, const std::string& fault) {
  peso::checks::FaultInjection injection;
  if (!fault.empty()) {
    if (fault == "svd-sigma") {
      injection.svd_sigma_perturb = 1e-6;
    } else {
      std::cerr << "error: unknown fault '" << fault << "' (supported: svd-sigma)\n";
      return kExitConfigError;
    }
  }

  std::vector<std::string> names;
  if (suite == "all") {
    names = peso::checks::suite_names();
  } else {
    names.push_back(suite);
  }

  json report = json::array();
  bool all_pass = true;
  try {
    for (const std::string& name : names) {
      const peso::checks::SuiteResult result = peso::checks::run_suite(name, injection);
      json suite_json;
      suite_json["suite"] = result.suite;
      suite_json["pass"] = result.passed();
      suite_json["checks"] = json::array();
      for (const auto& check : result.checks) {
        std::cout << (check.pass ? "[PASS] " : "[FAIL] ") << result.suite << "/" << check.name
                  << ": " << check.detail << "\n";
        suite_json["checks"].push_back(
            {{"name", check.name}, {"pass", check.pass}, {"detail", check.detail}});
        all_pass = all_pass && check.pass;
      }
      report.push_back(suite_json);
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  }

  const fs::path report_path = fs::path(out_dir.empty() ? "." : out_dir) / "check_report.json";
  fs::create_directories(report_path.parent_path());
  std::ofstream os(report_path);
  os << report.dump(2) << "\n";
  std::cout << (all_pass ? "all checks passed" : "CHECK FAILURES PRESENT") << " (report: "
            << report_path.string() << ")\n";
  return all_pass ? kExitOk : kExitCheckFailed;
}

void set_by_dotted_path(json& root, const std::string& dotted, const json& value) {
  json* node = &root;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = dotted.find('.', start);
    const std::string key = dotted.substr(start, dot == std::string::npos ? dot : dot - start);
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    node = &(*node)[key];
    start = dot + 1;
  }
}

int cmd_sweep(const std::string& config_path, const std::string& out_dir,
              const std::optional<std::uint64_t>& seed) {
  json root;
  try {
    std::ifstream is(config_path);
    if (!is) throw std::invalid_argument("config: cannot open '" + config_path + "'");
    root = json::parse(is);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  }
  if (!root.contains("sweep") || !root["sweep"].is_object() || root["sweep"].empty()) {
    std::cerr << "error: sweep config needs a non-empty top-level 'sweep' object\n";
    return kExitConfigError;
  }
  const json sweep = root["sweep"];
  root.erase("sweep");

  std::vector<std::string> keys;
  std::vector<std::vector<json>> values;
  for (auto it = sweep.begin(); it != sweep.end(); ++it) {
    if (!it.value().is_array() || it.value().empty()) {
      std::cerr << "error: sweep." << it.key() << " must be a non-empty array\n";
      return kExitConfigError;
    }
    keys.push_back(it.key());
    values.push_back(std::vector<json>(it.value().begin(), it.value().end()));
  }

  const fs::path dir(out_dir.empty() ? "sweep_out" : out_dir);
  fs::create_directories(dir);
  std::ofstream index(dir / "index.csv");
  index << "cell";
  for (const std::string& key : keys) index << "," << key;
  index << ",trace_file,final_loss,min_grad_norm,restarts\n";

  std::vector<std::size_t> cursor(keys.size(), 0);
  long cell = 0;
  while (true) {
    json doc = root;
    for (std::size_t i = 0; i < keys.size(); ++i)
      set_by_dotted_path(doc, keys[i], values[i][cursor[i]]);
    const std::string trace_name = "sweep_" + std::to_string(cell) + ".trace.csv";
    try {
      peso::harness::RunConfig config = peso::harness::parse_run_config(doc.dump());
      if (seed) peso::harness::override_seed(config, *seed);
      const peso::driver::RunResult result = peso::harness::execute_run(config);
      peso::harness::write_trace_csv(result.trace, (dir / trace_name).string());
      index << cell;
      for (std::size_t i = 0; i < keys.size(); ++i) index << "," << values[i][cursor[i]].dump();
      index << "," << trace_name << "," << fmt17(result.summary.final_loss) << ","
            << fmt17(result.summary.min_grad_norm) << "," << result.restart_steps.size() << "\n";
    } catch (const std::exception& e) {
      std::cerr << "error in sweep cell " << cell << ": " << e.what() << "\n";
      return kExitConfigError;
    }
    ++cell;
    std::size_t level = 0;
    while (level < cursor.size()) {
      if (++cursor[level] < values[level].size()) break;
      cursor[level] = 0;
      ++level;
    }
    if (level == cursor.size()) break;
  }
  std::cout << "wrote " << cell << " cells under " << dir.string() << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Subspace-minimization optimization benchmark"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> config_paths;
  std::string out_dir;
  std::string suite = "all";
  std::string fault;
  std::string dump_dir;
  std::uint64_t seed_value = 0;
  bool seed_given = false;

  auto* run = app.add_subcommand("run", "execute one configured run, write the trace CSV");
  run->add_option("--config", config_path, "run config JSON")->required();
  run->add_option("--out", out_dir, "directory overriding the configured output location");
  run->add_option("--seed", seed_value, "seed override")->each([&](const std::string&) {
    seed_given = true;
  });
  run->add_option("--dump-problem", dump_dir, "also dump problem fixtures (CSV) to this directory");

  auto* compare = app.add_subcommand("compare", "run several configs on one problem and align losses");
  compare->add_option("--config", config_paths, "run config JSON (repeat, order = column order)")
      ->required();
  compare->add_option("--out", out_dir, "output directory (default .)");
  compare->add_option("--seed", seed_value, "seed override for every run")
      ->each([&](const std::string&) { seed_given = true; });

  auto* check = app.add_subcommand("check", "run invariant suites, write a JSON report");
  check->add_option("--suite", suite, "suite name or 'all'");
  check->add_option("--out", out_dir, "report directory (default .)");
  check->add_option("--inject-fault", fault, "test hook: perturb a computation (svd-sigma)");

  auto* sweep = app.add_subcommand("sweep", "grid over declared parameter lists");
  sweep->add_option("--config", config_path, "base config with a top-level 'sweep' object")
      ->required();
  sweep->add_option("--out", out_dir, "output directory (default sweep_out)");
  sweep->add_option("--seed", seed_value, "seed override for every cell")
      ->each([&](const std::string&) { seed_given = true; });

  CLI11_PARSE(app, argc, argv);
  const std::optional<std::uint64_t> seed =
      seed_given ? std::optional<std::uint64_t>(seed_value) : std::nullopt;

  if (run->parsed()) return cmd_run(config_path, out_dir, seed, dump_dir);
  if (compare->parsed()) return cmd_compare(config_paths, out_dir, seed);
  if (check->parsed()) return cmd_check(suite, out_dir, fault);
  if (sweep->parsed()) return cmd_sweep(config_path, out_dir, seed);
  return kExitConfigError;
}
