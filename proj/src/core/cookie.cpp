#include "core/cookie.hpp"

#include <cmath>

#include "core/error.hpp"

namespace arrec::proc {

double mean_log_rho(const dist::InnovationLaw& omega_law) {
  std::vector<double> values;
  std::vector<double> probs;
  if (omega_law.kind() == dist::Kind::Deterministic) {
    values = {omega_law.value()};
    probs = {1.0};
  } else if (omega_law.kind() == dist::Kind::DiscreteTable) {
    values = omega_law.values();
    probs = omega_law.probs();
  } else {
    throw Error(ErrorCode::Unsupported, "omega law must be deterministic or a discrete table");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (probs[i] == 0.0) continue;
    const double w = values[i];
    if (!(w > 0.0 && w < 1.0)) throw Error(ErrorCode::InvalidArgument, "omega values must lie in (0, 1)");
    acc += probs[i] * std::log((1.0 - w) / w);
  }
  return acc;
}

CookieWalk::CookieWalk(const CookieWalkConfig& config)
    : omega_law_(config.omega_law), cookie_law_(config.cookie_law) {
  mean_log_rho(config.omega_law);  // validates the omega values
}

CookieWalk::Site& CookieWalk::site(std::int64_t x, Stream& rng) {
  std::vector<Site>& side = x >= 0 ? right_ : left_;
  const auto idx = static_cast<std::size_t>(x >= 0 ? x : -x - 1);
  if (idx >= side.size()) side.resize(idx + 1);
  Site& s = side[idx];
  if (s.omega < 0.0) {
    s.omega = omega_law_.sample(rng);
    const double c = cookie_law_.sample(rng);
    s.cookies = c >= 1.8e19 ? UINT64_MAX : static_cast<std::uint64_t>(std::floor(c));
  }
  return s;
}

void CookieWalk::step(Stream& rng) {
  Site& s = site(summary_.position, rng);
  int dir;
  if (s.cookies > 0) {
    --s.cookies;
    ++summary_.cookies_consumed;
    dir = 1;
  } else {
    dir = rng.uniform() < s.omega ? 1 : -1;
  }
  summary_.position += dir;
  summary_.min_position = std::min(summary_.min_position, summary_.position);
  summary_.max_position = std::max(summary_.max_position, summary_.position);
  if (summary_.position == 0) ++summary_.returns_to_zero;
  ++summary_.steps;
}

CookieWalkSummary simulate_cookie_walk(const CookieWalkConfig& config, Stream& rng) {
  CookieWalk walk(config);
  for (std::uint64_t n = 0; n < config.steps; ++n) walk.step(rng);
  return walk.summary();
}

}  // namespace arrec::proc
