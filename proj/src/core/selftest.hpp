#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "core/dist.hpp"
#include "core/matrix_env.hpp"
#include "core/scenario.hpp"

namespace arrec::selftest {

struct SuiteResult {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

struct Suite {
  std::string name;
  // Returns a one-line detail; throws or returns via `ok = false` on failure.
  std::function<std::string(bool& ok)> run;
};

std::vector<Suite> suites();
SuiteResult run_suite(const Suite& suite);
std::vector<SuiteResult> run_all();
harness::Json results_json(const std::vector<SuiteResult>& results);

struct NamedLaw {
  std::string name;
  dist::InnovationLaw law;
};

/// The built-in law battery the property suites sweep over.
std::vector<NamedLaw> builtin_laws();

/// Two positive 2 x 2 atoms with probability 1/2 each, mildly subcritical
/// (both spectral radii in (0.8, 0.85)).
env::MatrixEnsemble reference_ensemble();

}  // namespace arrec::selftest
