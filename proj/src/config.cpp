// SPDX-License-Identifier: Apache-2.0

#include "peso/config.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

namespace peso::harness {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& message) { throw std::invalid_argument(message); }

void reject_unknown(const json& obj, const std::string& path,
                    std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* key : allowed)
      if (it.key() == key) {
        known = true;
        break;
      }
    if (!known) fail("config: unknown key '" + path + it.key() + "'");
  }
}

double require_number(const json& obj, const std::string& path, const char* key) {
  if (!obj.contains(key)) fail("config: missing field '" + path + key + "'");
  if (!obj[key].is_number()) fail("config: field '" + path + key + "' must be a number");
  return obj[key].get<double>();
}

double number_or(const json& obj, const std::string& path, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number()) fail("config: field '" + path + key + "' must be a number");
  return obj[key].get<double>();
}

long integer_or(const json& obj, const std::string& path, const char* key, long fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number_integer()) fail("config: field '" + path + key + "' must be an integer");
  return obj[key].get<long>();
}

std::string string_or(const json& obj, const std::string& path, const char* key,
                      const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_string()) fail("config: field '" + path + key + "' must be a string");
  return obj[key].get<std::string>();
}

bool bool_or(const json& obj, const std::string& path, const char* key, bool fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_boolean()) fail("config: field '" + path + key + "' must be a boolean");
  return obj[key].get<bool>();
}

ProblemConfig parse_problem(const json& obj) {
  ProblemConfig p;
  const std::string kind = string_or(obj, "problem.", "kind", "quadratic");
  if (kind == "quadratic") {
    p.kind = ProblemKind::Quadratic;
    reject_unknown(obj, "problem.", {"kind", "a", "n", "r_ones"});
    p.a = number_or(obj, "problem.", "a", 10.0);
    p.n = static_cast<std::size_t>(integer_or(obj, "problem.", "n", 16));
    p.r_ones = static_cast<std::size_t>(integer_or(obj, "problem.", "r_ones", 4));
    if (!(p.a > 0.0)) fail("config: problem.a must be > 0");
    if (p.r_ones < 1) fail("config: problem.r_ones must be >= 1");
    if (p.n < p.r_ones) fail("config: problem.n must be >= problem.r_ones");
  } else if (kind == "mlp") {
    p.kind = ProblemKind::Mlp;
    reject_unknown(obj, "problem.",
                   {"kind", "n_in", "n_hidden", "n_out", "n_samples", "data_seed"});
    p.mlp.n_in = static_cast<std::size_t>(integer_or(obj, "problem.", "n_in", 8));
    p.mlp.n_hidden = static_cast<std::size_t>(integer_or(obj, "problem.", "n_hidden", 8));
    p.mlp.n_out = static_cast<std::size_t>(integer_or(obj, "problem.", "n_out", 4));
    p.mlp.n_samples = static_cast<std::size_t>(integer_or(obj, "problem.", "n_samples", 32));
    p.mlp.seed = static_cast<std::uint64_t>(integer_or(obj, "problem.", "data_seed", 0));
    if (p.mlp.n_in == 0 || p.mlp.n_hidden == 0 || p.mlp.n_out == 0 || p.mlp.n_samples == 0)
      fail("config: problem block has a zero layer size");
  } else {
    fail("config: problem.kind must be 'quadratic' or 'mlp'");
  }
  return p;
}

optim::ScheduleKind parse_schedule_kind(const std::string& name, const std::string& field) {
  if (name == "constant") return optim::ScheduleKind::Constant;
  if (name == "cosine-with-warmup") return optim::ScheduleKind::CosineWarmup;
  if (name == "diminishing") return optim::ScheduleKind::Diminishing;
  fail("config: " + field + " must be constant, cosine-with-warmup or diminishing");
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const std::exception& e) {
    fail(std::string("config: invalid JSON: ") + e.what());
  }
  reject_unknown(root, "",
                 {"problem", "method", "optimizer", "noise", "seed", "total_steps", "output",
                  "subspace_log"});

  RunConfig cfg;
  if (!root.contains("problem")) fail("config: missing field 'problem'");
  cfg.problem = parse_problem(root["problem"]);

  if (!root.contains("method")) fail("config: missing field 'method'");
  const json& method = root["method"];
  reject_unknown(method, "method.",
                 {"kind", "K", "r", "gamma", "tau1", "tau2", "smoothing", "alignment", "beta2_min",
                  "exploration", "restart_schedule", "galore_adamw", "max_restarts"});
  const std::string kind = string_or(method, "method.", "kind", "");
  if (kind == "lora")
    cfg.method = MethodKind::Lora;
  else if (kind == "peso-lora-r")
    cfg.method = MethodKind::PesoLoraR;
  else if (kind == "peso-lora-t")
    cfg.method = MethodKind::PesoLoraT;
  else if (kind == "galore")
    cfg.method = MethodKind::Galore;
  else
    fail("config: method.kind must be lora, peso-lora-r, peso-lora-t or galore");

  driver::PesoConfig& peso = cfg.peso;
  peso.frequency_k = integer_or(method, "method.", "K", 1);
  if (peso.frequency_k < 1) fail("config: method.K must be >= 1");
  peso.rank = static_cast<std::size_t>(integer_or(method, "method.", "r", 1));
  if (integer_or(method, "method.", "r", 1) < 1) fail("config: method.r must be >= 1");
  peso.gamma = number_or(method, "method.", "gamma", 1.0);
  if (!(peso.gamma > 0.0)) fail("config: method.gamma must be > 0");
  peso.max_restarts = integer_or(method, "method.", "max_restarts", -1);
  peso.alignment = bool_or(method, "method.", "alignment", false);
  peso.beta2_min = number_or(method, "method.", "beta2_min", 0.95);
  if (bool_or(method, "method.", "smoothing", false)) {
    subspace::SmoothingConfig smoothing;
    smoothing.tau1 = number_or(method, "method.", "tau1", 0.9);
    smoothing.tau2 = number_or(method, "method.", "tau2", 0.9);
    if (smoothing.tau1 < 0.0 || smoothing.tau1 > 1.0) fail("config: method.tau1 must be in [0,1]");
    if (smoothing.tau2 < 0.0 || smoothing.tau2 > 1.0) fail("config: method.tau2 must be in [0,1]");
    peso.smoothing = smoothing;
  } else if (method.contains("tau1") || method.contains("tau2")) {
    fail("config: method.tau1/tau2 require method.smoothing = true");
  }
  const std::string exploration =
      string_or(method, "method.", "exploration", "full-gradient-restart");
  if (exploration == "full-gradient-restart")
    peso.exploration = driver::Exploration::FullGradientRestart;
  else if (exploration == "muon")
    peso.exploration = driver::Exploration::MuonRestart;
  else
    fail("config: method.exploration must be full-gradient-restart or muon");
  peso.galore_adamw = bool_or(method, "method.", "galore_adamw", false);
  if (method.contains("restart_schedule")) {
    const json& rs = method["restart_schedule"];
    reject_unknown(rs, "method.restart_schedule.", {"kind", "eta0"});
    optim::LrSchedule schedule;
    schedule.kind = parse_schedule_kind(string_or(rs, "method.restart_schedule.", "kind", "constant"),
                                        "method.restart_schedule.kind");
    if (schedule.kind == optim::ScheduleKind::CosineWarmup)
      fail("config: method.restart_schedule.kind cannot be cosine-with-warmup");
    schedule.base_lr = require_number(rs, "method.restart_schedule.", "eta0");
    peso.restart_lr = schedule;
  }

  if (!root.contains("optimizer")) fail("config: missing field 'optimizer'");
  const json& opt = root["optimizer"];
  reject_unknown(opt, "optimizer.",
                 {"kind", "lr", "beta1", "beta2", "eps", "weight_decay", "schedule", "warmup_ratio"});
  const std::string opt_kind = string_or(opt, "optimizer.", "kind", "adamw");
  if (opt_kind == "adamw")
    peso.inner_opt = driver::InnerOpt::AdamW;
  else if (opt_kind == "sgd")
    peso.inner_opt = driver::InnerOpt::Sgd;
  else
    fail("config: optimizer.kind must be adamw or sgd");
  peso.inner_lr.base_lr = number_or(opt, "optimizer.", "lr", 1e-3);
  peso.inner_lr.kind =
      parse_schedule_kind(string_or(opt, "optimizer.", "schedule", "constant"), "optimizer.schedule");
  peso.inner_lr.warmup_ratio = number_or(opt, "optimizer.", "warmup_ratio", 0.03);
  peso.adam.beta1 = number_or(opt, "optimizer.", "beta1", 0.9);
  peso.adam.beta2 = number_or(opt, "optimizer.", "beta2", 0.999);
  peso.adam.eps = number_or(opt, "optimizer.", "eps", 1e-8);
  peso.adam.weight_decay = number_or(opt, "optimizer.", "weight_decay", 0.0);
  if (peso.adam.beta1 <= 0.0 || peso.adam.beta1 >= 1.0) fail("config: optimizer.beta1 must be in (0,1)");
  if (peso.adam.beta2 <= 0.0 || peso.adam.beta2 >= 1.0) fail("config: optimizer.beta2 must be in (0,1)");
  if (!(peso.adam.eps > 0.0)) fail("config: optimizer.eps must be > 0");
  if (peso.adam.weight_decay < 0.0) fail("config: optimizer.weight_decay must be >= 0");
  if (peso.inner_lr.base_lr < 0.0) fail("config: optimizer.lr must be >= 0");

  if (root.contains("noise")) {
    const json& noise = root["noise"];
    reject_unknown(noise, "noise.", {"C", "seed"});
    problems::NoiseModel model;
    model.variance_bound = require_number(noise, "noise.", "C");
    if (model.variance_bound < 0.0) fail("config: noise.C must be >= 0");
    if (model.variance_bound > 0.0) peso.noise = model;
  }

  cfg.seed = static_cast<std::uint64_t>(integer_or(root, "", "seed", 0));
  peso.seed = cfg.seed;
  if (peso.noise) {
    const json& noise = root["noise"];
    peso.noise->seed =
        noise.contains("seed") ? static_cast<std::uint64_t>(integer_or(noise, "noise.", "seed", 0))
                               : cfg.seed;
  }

  peso.total_steps = integer_or(root, "", "total_steps", 100);
  if (peso.total_steps < 1) fail("config: total_steps must be >= 1");
  peso.inner_lr.total_steps = peso.total_steps;
  cfg.output = string_or(root, "", "output", "trace.csv");
  cfg.subspace_log = bool_or(root, "", "subspace_log", false);
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) fail("config: cannot open '" + path + "'");
  std::stringstream buffer;
  buffer << is.rdbuf();
  RunConfig cfg = parse_run_config(buffer.str());
  cfg.source_path = path;
  return cfg;
}

void override_seed(RunConfig& config, std::uint64_t seed) {
  config.seed = seed;
  config.peso.seed = seed;
  if (config.peso.noise) config.peso.noise->seed = seed;
}

problems::Objective build_objective(const ProblemConfig& problem) {
  if (problem.kind == ProblemKind::Quadratic)
    return problems::quadratic_objective(problem.a, problem.n, problem.r_ones - 1);
  return problems::mlp_objective(problem.mlp);
}

bool same_problem(const ProblemConfig& x, const ProblemConfig& y) {
  if (x.kind != y.kind) return false;
  if (x.kind == ProblemKind::Quadratic)
    return x.a == y.a && x.n == y.n && x.r_ones == y.r_ones;
  return x.mlp.n_in == y.mlp.n_in && x.mlp.n_hidden == y.mlp.n_hidden &&
         x.mlp.n_out == y.mlp.n_out && x.mlp.n_samples == y.mlp.n_samples &&
         x.mlp.seed == y.mlp.seed;
}

driver::RunResult execute_run(const RunConfig& config) {
  const problems::Objective objective = build_objective(config.problem);
  switch (config.method) {
    case MethodKind::Lora:
      return driver::run_lora_baseline(objective, config.peso);
    case MethodKind::PesoLoraR:
      return driver::run_peso_lora_r(objective, config.peso);
    case MethodKind::PesoLoraT:
      return driver::run_peso_lora_t(objective, config.peso);
    case MethodKind::Galore:
      return driver::run_galore_baseline(objective, config.peso);
  }
  throw std::logic_error("execute_run: unknown method");
}

void dump_problem_fixtures(const ProblemConfig& problem, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path base(dir);
  if (problem.kind == ProblemKind::Quadratic) {
    linalg::write_matrix_csv(problems::quadratic_target(problem.a, problem.n, problem.r_ones - 1),
                             (base / "target_m.csv").string());
    return;
  }
  const problems::MlpData data = problems::make_mlp_data(problem.mlp);
  linalg::write_matrix_csv(data.inputs, (base / "inputs.csv").string());
  linalg::write_matrix_csv(data.targets, (base / "targets.csv").string());
  linalg::write_matrix_csv(data.readout, (base / "readout.csv").string());
}

void write_subspace_csv(const std::vector<driver::SubspaceSnapshot>& snapshots,
                        const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for write: " + path);
  os << std::setprecision(17);
  if (snapshots.empty()) {
    os << "step,delta\n";
    return;
  }
  const auto& first = snapshots.front();
  os << "step,delta";
  for (std::size_t i = 0; i < first.sigma.size(); ++i) os << ",sigma_" << i;
  for (std::size_t j = 0; j < first.u.cols(); ++j)
    for (std::size_t i = 0; i < first.u.rows(); ++i) os << ",u_" << i << "_" << j;
  for (std::size_t j = 0; j < first.v.cols(); ++j)
    for (std::size_t i = 0; i < first.v.rows(); ++i) os << ",v_" << i << "_" << j;
  os << "\n";
  for (const auto& snap : snapshots) {
    os << snap.step << "," << snap.delta;
    for (double s : snap.sigma) os << "," << s;
    for (std::size_t j = 0; j < snap.u.cols(); ++j)
      for (std::size_t i = 0; i < snap.u.rows(); ++i) os << "," << snap.u(i, j);
    for (std::size_t j = 0; j < snap.v.cols(); ++j)
      for (std::size_t i = 0; i < snap.v.rows(); ++i) os << "," << snap.v(i, j);
    os << "\n";
  }
}

std::string method_name(MethodKind kind) {
  switch (kind) {
    case MethodKind::Lora: return "lora";
    case MethodKind::PesoLoraR: return "peso-lora-r";
    case MethodKind::PesoLoraT: return "peso-lora-t";
    case MethodKind::Galore: return "galore";
  }
  return "unknown";
}

}  // namespace peso::harness
