#include "core/frog.hpp"

#include <cfloat>
#include <cmath>
#include <vector>

#include "core/error.hpp"

namespace arrec::proc {

namespace {

constexpr double kCriticalGap = 1e-12;

std::uint64_t to_count(double v) {
  if (!(v >= 0.0)) throw Error(ErrorCode::InvalidArgument, "sleep law produced a negative count");
  if (v >= 1.8e19) return UINT64_MAX;
  return static_cast<std::uint64_t>(std::floor(v));
}

}  // namespace

double frog_rho(double p, double r) {
  if (!(p > 0.0 && p <= 1.0)) throw Error(ErrorCode::InvalidArgument, "frog survival p must lie in (0, 1]");
  if (!(r > 0.0 && r < 1.0)) throw Error(ErrorCode::InvalidArgument, "frog right-step r must lie in (0, 1)");
  const double disc = 1.0 - 4.0 * p * p * r * (1.0 - r);
  // Rationalized form of (1 - sqrt(disc)) / (2p(1-r)); no cancellation.
  const double rho = 2.0 * p * r / (1.0 + std::sqrt(std::max(0.0, disc)));
  if (rho >= 1.0 - kCriticalGap) {
    throw Error(ErrorCode::CriticalRho, "rho(p, r) = 1: the frog branching structure is critical");
  }
  return rho;
}

FrogOutcome simulate_frog(const FrogConfig& config, Stream& rng) {
  const double rho = frog_rho(config.p, config.r);
  const double log_rho = std::log(rho);
  FrogOutcome out;

  std::vector<std::uint64_t> pending;  // start sites of woken, unprocessed frogs
  auto wake = [&](std::uint64_t site) {
    const std::uint64_t y = to_count(config.sleep_law.sample(rng));
    if (y > config.wake_cap - out.woken_count) {
      out.woken_count = config.wake_cap + 1;
      out.truncated = true;
      return;
    }
    out.woken_count += y;
    pending.insert(pending.end(), y, site);
  };

  wake(0);
  while (!out.truncated && !pending.empty()) {
    const std::uint64_t start = pending.back();
    pending.pop_back();
    std::int64_t x = static_cast<std::int64_t>(start);
    std::int64_t reach = x;
    bool at_zero = x == 0;
    while (!at_zero) {
      if (config.p < 1.0 && rng.uniform() >= config.p) break;
      x += rng.uniform() < config.r ? 1 : -1;
      reach = std::max(reach, x);
      at_zero = x == 0;
      if (++out.steps > config.step_cap) {
        out.truncated = true;
        break;
      }
    }
    if (out.truncated) break;
    if (at_zero) {
      ++out.zero_visit_count;
      const double overshoot = std::floor(std::log(rng.uniform_pos()) / log_rho);
      reach = std::max(reach, static_cast<std::int64_t>(std::min(overshoot, 9.0e18)));
    }
    while (!out.truncated && static_cast<std::int64_t>(out.frontier) < reach) {
      if (out.frontier >= config.site_cap) {
        out.truncated = true;
        break;
      }
      ++out.frontier;
      wake(out.frontier);
    }
  }
  return out;
}

}  // namespace arrec::proc
