// Command-line front end over the arrec C API.
//
// Exit codes: 0 ok, 1 configuration or input error, 2 selftest or agreement
// failure, 3 budget exceeded.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "arrec/arrec.h"

namespace {

using Json = nlohmann::json;

enum Exit { kOk = 0, kConfig = 1, kFailed = 2, kBudget = 3 };

int exit_for(arrec_status s) {
  switch (s) {
    case ARREC_OK:
      return kOk;
    case ARREC_ERR_BUDGET:
      return kBudget;
    case ARREC_ERR_INTERNAL:
      return kFailed;
    default:
      return kConfig;
  }
}

int report_error(arrec_status s) {
  std::cerr << "error: " << arrec_last_error() << "\n";
  return exit_for(s);
}

struct ScenarioHandle {
  arrec_scenario* ptr = nullptr;
  ~ScenarioHandle() { arrec_scenario_free(ptr); }
};

struct ReportHandle {
  arrec_report* ptr = nullptr;
  ~ReportHandle() { arrec_report_free(ptr); }
};

// Prints report.json, optionally writes the run directory.
int emit(const ReportHandle& report, const std::string& out_dir, bool check_passed) {
  std::cout << arrec_report_json(report.ptr);
  if (!out_dir.empty()) {
    const arrec_status s = arrec_report_write(report.ptr, out_dir.c_str());
    if (s != ARREC_OK) return report_error(s);
  }
  if (check_passed && !arrec_report_passed(report.ptr)) return kFailed;
  return kOk;
}

using Runner = arrec_status (*)(const arrec_scenario*, arrec_report**);

int run_json(const std::string& config_text, Runner run, const std::string& out_dir, bool check_passed) {
  ScenarioHandle sc;
  arrec_status s = arrec_scenario_from_json(config_text.c_str(), &sc.ptr);
  if (s != ARREC_OK) return report_error(s);
  ReportHandle rep;
  s = run(sc.ptr, &rep.ptr);
  if (s != ARREC_OK) return report_error(s);
  return emit(rep, out_dir, check_passed);
}

int run_file(const std::string& path, Runner run, const std::string& out_dir, bool check_passed) {
  ScenarioHandle sc;
  arrec_status s = arrec_scenario_from_file(path.c_str(), &sc.ptr);
  if (s != ARREC_OK) return report_error(s);
  ReportHandle rep;
  s = run(sc.ptr, &rep.ptr);
  if (s != ARREC_OK) return report_error(s);
  return emit(rep, out_dir, check_passed);
}

std::optional<Json> parse_law_flag(const std::string& text, const char* flag) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    std::cerr << "error: " << flag << " is not valid JSON: " << e.what() << "\n";
    return std::nullopt;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulation and recurrence classification for contractive autoregressive chains"};
  app.set_version_flag("--version", std::string(arrec_version()));
  app.require_subcommand(1);

  std::string config, out_dir;
  std::uint64_t seed = 1;

  auto* classify = app.add_subcommand("classify", "Classify a scenario as recurrent or transient");
  classify->add_option("--config", config, "Scenario JSON file")->required();
  classify->add_option("--out", out_dir, "Run directory for report.json and meta.json");

  auto* simulate = app.add_subcommand("simulate", "Simulate one seeded trajectory");
  simulate->add_option("--config", config, "Scenario JSON file")->required();
  simulate->add_option("--seed", seed, "Random seed")->capture_default_str();
  simulate->add_option("--out", out_dir, "Run directory (trajectories/ holds the CSV files)");

  auto* lyapunov = app.add_subcommand("lyapunov", "Estimate the Lyapunov exponent of the ensemble");
  lyapunov->add_option("--config", config, "Scenario JSON file")->required();
  lyapunov->add_option("--out", out_dir, "Run directory");

  auto* validate = app.add_subcommand("validate", "Classifier plus Monte Carlo probe plus agreement row");
  validate->add_option("--config", config, "Scenario JSON file")->required();
  validate->add_option("--out", out_dir, "Run directory");

  double frog_p = 0.9, frog_r = 0.5;
  std::string sleep = R"({"kind": "deterministic", "value": 1})";
  std::uint64_t runs = 1000, wake_cap = 100000;
  auto* frog = app.add_subcommand("frog", "Classify and probe a mortal frog model");
  frog->add_option("--config", config, "Scenario JSON file (overrides the flags)");
  frog->add_option("--p", frog_p, "Survival probability per step")->capture_default_str();
  frog->add_option("--r", frog_r, "Probability of a right step")->capture_default_str();
  frog->add_option("--sleep", sleep, "Sleeping-frog count law as JSON")->capture_default_str();
  frog->add_option("--runs", runs, "Simulated runs")->capture_default_str();
  frog->add_option("--wake-cap", wake_cap, "Woken frogs before a run counts as truncated")->capture_default_str();
  frog->add_option("--seed", seed, "Random seed")->capture_default_str();
  frog->add_option("--out", out_dir, "Run directory");

  std::string omega = R"({"kind": "deterministic", "value": 0.4})";
  std::string cookies = R"({"kind": "geometric", "q": 0.5})";
  std::uint64_t steps = 100000, replicas = 100;
  auto* cookie = app.add_subcommand("cookie-walk", "Classify and probe a cookie random walk");
  cookie->add_option("--config", config, "Scenario JSON file (overrides the flags)");
  cookie->add_option("--omega", omega, "Environment law of omega as JSON")->capture_default_str();
  cookie->add_option("--cookies", cookies, "Cookie count law as JSON")->capture_default_str();
  cookie->add_option("--steps", steps, "Steps per replica")->capture_default_str();
  cookie->add_option("--replicas", replicas, "Replicas")->capture_default_str();
  cookie->add_option("--seed", seed, "Random seed")->capture_default_str();
  cookie->add_option("--out", out_dir, "Run directory");

  auto* selftest = app.add_subcommand("selftest", "Run the invariant battery");
  selftest->add_option("--out", out_dir, "Run directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  if (*classify) return run_file(config, arrec_classify, out_dir, false);
  if (*lyapunov) return run_file(config, arrec_lyapunov, out_dir, false);
  if (*validate) return run_file(config, arrec_validate, out_dir, true);
  if (*simulate) {
    ScenarioHandle sc;
    arrec_status s = arrec_scenario_from_file(config.c_str(), &sc.ptr);
    if (s != ARREC_OK) return report_error(s);
    ReportHandle rep;
    s = arrec_simulate(sc.ptr, seed, &rep.ptr);
    if (s != ARREC_OK) return report_error(s);
    return emit(rep, out_dir, false);
  }
  if (*frog) {
    if (!config.empty()) return run_file(config, arrec_validate, out_dir, true);
    const auto law = parse_law_flag(sleep, "--sleep");
    if (!law) return kConfig;
    Json sc{{"name", "frog"},
            {"process", {{"kind", "frog"}, {"p", frog_p}, {"r", frog_r}, {"wake_cap", wake_cap}}},
            {"innovation", *law},
            {"probe", {{"replicas", runs}, {"seed", seed}}}};
    return run_json(sc.dump(), arrec_validate, out_dir, true);
  }
  if (*cookie) {
    if (!config.empty()) return run_file(config, arrec_validate, out_dir, true);
    const auto omega_law = parse_law_flag(omega, "--omega");
    const auto cookie_law = parse_law_flag(cookies, "--cookies");
    if (!omega_law || !cookie_law) return kConfig;
    Json sc{{"name", "cookie_walk"},
            {"process", {{"kind", "cookie_walk"}, {"omega", *omega_law}}},
            {"innovation", *cookie_law},
            {"probe", {{"horizon", steps}, {"replicas", replicas}, {"seed", seed}}}};
    return run_json(sc.dump(), arrec_validate, out_dir, true);
  }
  if (*selftest) {
    ReportHandle rep;
    const arrec_status s = arrec_selftest(&rep.ptr);
    if (s != ARREC_OK) return report_error(s);
    return emit(rep, out_dir, true);
  }
  return kConfig;
}
