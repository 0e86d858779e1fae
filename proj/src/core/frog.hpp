#pragma once

#include <cstddef>
#include <cstdint>

#include "core/dist.hpp"
#include "core/rng.hpp"

namespace arrec::proc {

struct FrogConfig {
  double p = 0.9;   // per-step survival probability; lifetime ~ Geometric(1 - p)
  double r = 0.5;   // probability of a step to the right
  dist::InnovationLaw sleep_law = dist::InnovationLaw::deterministic(1.0);
  std::uint64_t site_cap = 1'000'000;
  std::uint64_t wake_cap = 100'000;
  std::uint64_t step_cap = 100'000'000;
};

struct FrogOutcome {
  std::uint64_t woken_count = 0;
  std::uint64_t zero_visit_count = 0;  // distinct frogs that were ever at 0
  std::uint64_t frontier = 0;          // largest site reached
  std::uint64_t steps = 0;             // explicitly simulated walk steps
  bool truncated = false;
};

/// Probability that a frog started at 0 ever reaches +1, the smaller root of
/// a = pr + p(1-r) a^2. Throws CriticalRho when it is (numerically) 1.
double frog_rho(double p, double r);

/// Sleeping frogs sit on the sites n >= 0; the ones at 0 start awake. Frogs
/// that have not yet been at 0 are walked step by step until they reach 0 or
/// die. From 0 onwards only the further maximum matters for waking, and that
/// overshoot is drawn exactly from P[D >= k] = rho^k.
FrogOutcome simulate_frog(const FrogConfig& config, Stream& rng);

}  // namespace arrec::proc
