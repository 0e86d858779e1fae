#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "core/classify.hpp"
#include "core/dist.hpp"
#include "core/matrix_env.hpp"
#include "core/probe.hpp"

namespace arrec::harness {

using Json = nlohmann::json;

struct ClassifierConfig {
  std::vector<double> y_grid{1.0, 10.0, 100.0};
  cls::SeriesOptions series;
  env::LyapunovOptions lyapunov;
};

struct Scenario {
  std::string name;
  ProcessSpec process;
  ClassifierConfig classifier;
  ProbeSpec probe;
  std::uint64_t simulate_steps = 1000;
  Json raw;  // the parsed configuration, echoed into meta.json
};

/// All failures are ConfigError with the dotted path of the offending field.
Scenario parse_scenario(const Json& config);
Scenario parse_scenario_text(const std::string& text);
Scenario load_scenario(const std::string& path);

dist::InnovationLaw parse_law(const Json& node, const std::string& path);
env::MatrixEnsemble parse_ensemble(const Json& node, const std::string& path);

}  // namespace arrec::harness
