#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "core/dist.hpp"
#include "core/rng.hpp"

namespace arrec::proc {

struct CookieWalkConfig {
  dist::InnovationLaw omega_law = dist::InnovationLaw::deterministic(0.5);  // values in (0, 1)
  dist::InnovationLaw cookie_law = dist::InnovationLaw::deterministic(0.0);
  std::uint64_t steps = 100'000;
};

struct CookieWalkSummary {
  std::int64_t position = 0;
  std::int64_t min_position = 0;
  std::int64_t max_position = 0;
  std::uint64_t returns_to_zero = 0;
  std::uint64_t cookies_consumed = 0;
  std::uint64_t steps = 0;
};

/// E[ln rho_0] with rho_0 = (1 - w)/w; the omega law must be a point mass or
/// a finite table with values inside (0, 1).
double mean_log_rho(const dist::InnovationLaw& omega_law);

// Random walk in an i.i.d. environment with cookie piles of maximal strength:
// while a site still holds cookies the walker eats one and steps right,
// otherwise it steps right with probability omega_x. Site data is drawn
// lazily on the first visit.
class CookieWalk {
 public:
  explicit CookieWalk(const CookieWalkConfig& config);

  void step(Stream& rng);
  std::int64_t position() const noexcept { return summary_.position; }
  const CookieWalkSummary& summary() const noexcept { return summary_; }

 private:
  struct Site {
    double omega = -1.0;  // negative until drawn
    std::uint64_t cookies = 0;
  };
  Site& site(std::int64_t x, Stream& rng);

  dist::InnovationLaw omega_law_;
  dist::InnovationLaw cookie_law_;
  std::vector<Site> right_;  // sites 0, 1, 2, ...
  std::vector<Site> left_;   // sites -1, -2, ...
  CookieWalkSummary summary_;
};

CookieWalkSummary simulate_cookie_walk(const CookieWalkConfig& config, Stream& rng);

}  // namespace arrec::proc
