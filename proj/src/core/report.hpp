#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "core/classify.hpp"
#include "core/probe.hpp"
#include "core/scenario.hpp"

namespace arrec::harness {

inline constexpr const char* kVersion = "0.3.0";

struct OutputFile {
  std::string name;  // relative to the run directory
  std::string data;
};

struct RunOutput {
  std::vector<OutputFile> files;  // report.json first, then meta.json, then trajectories
  bool passed = true;             // false when an agreement row fails
  const std::string& report() const { return files.front().data; }
};

struct Classification {
  Json json;
  std::optional<cls::Outcome> outcome;
  std::optional<cls::CookieOutcome> cookie;
};

Json verdict_json(const cls::Verdict& v);
Json tail_class_json(const dist::TailClass& tc);
Json probe_json(const ProbeReport& r);

Classification classify_scenario(const Scenario& sc);

RunOutput run_classify(const Scenario& sc);
RunOutput run_simulate(const Scenario& sc, std::uint64_t seed);
RunOutput run_lyapunov(const Scenario& sc);
RunOutput run_validate(const Scenario& sc);

/// Serialises JSON with sorted keys and a trailing newline.
std::string dump(const Json& j);
/// Shortest round-trip decimal form.
std::string format_number(double v);

/// Writes every file under `dir`, each through a temporary file and rename.
void write_run_dir(const std::string& dir, const RunOutput& out);

}  // namespace arrec::harness
