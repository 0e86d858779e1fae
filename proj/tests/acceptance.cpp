// Acceptance battery: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "core/classify.hpp"
#include "core/error.hpp"
#include "core/frog.hpp"
#include "core/matrix_env.hpp"
#include "core/processes.hpp"
#include "core/report.hpp"
#include "core/scenario.hpp"
#include "core/selftest.hpp"

using namespace arrec;
using dist::InnovationLaw;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

harness::Scenario scenario(const std::string& name) {
  return harness::load_scenario(std::string(ARREC_SCENARIO_DIR) + "/" + name + ".json");
}

env::MatrixEnsemble two_atoms() {
  return env::MatrixEnsemble(2, {{Matrix{{0.5, 0.4}, {0.3, 0.5}}, 0.5}, {Matrix{{0.6, 0.2}, {0.4, 0.4}}, 0.5}});
}

bool le(double lhs, double rhs) { return lhs <= rhs * (1.0 + 1e-10); }

double small_delta(const Matrix& a) { return env::variation_stats(a).delta; }

Matrix random_positive(std::size_t d, Stream& rng) {
  Matrix a(d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) a(i, j) = std::exp(8.0 * rng.uniform() - 4.0);
  return a;
}

// AC1
bool phase_table(std::string& detail) {
  const auto t0 = Clock::now();
  const std::vector<std::pair<std::string, std::string>> cases{
      {"ar_log_pareto_p2", "PositiveRecurrent"}, {"ar_log_pareto_p1", "Recurrent"}, {"ar_log_pareto_p05", "Transient"}};
  bool ok = true;
  for (const auto& [name, expected] : cases) {
    const auto sc = scenario(name);
    if (sc.probe.horizon != 100'000 || sc.probe.replicas != 200) ok = false;
    const auto out = harness::run_validate(sc);
    const auto j = harness::Json::parse(out.report());
    const std::string got = j["classification"]["outcome"];
    const std::string status = j["agreement"]["status"];
    detail += name + "=" + got + "/" + status + " ";
    if (got != expected || status != "PASS") ok = false;
  }
  const double secs = seconds_since(t0);
  detail += "in " + harness::format_number(std::round(secs * 10) / 10) + " s";
  return ok && secs < 120.0;
}

// AC2
bool kesten_identity(std::string& detail) {
  const auto w = InnovationLaw::discrete_table({0, 1, 2}, {0.5, 0.3, 0.2});
  const std::size_t reps = 100'000;
  Stream root(77'001);
  std::size_t zeros = 0;
  for (std::size_t k = 0; k < reps; ++k) {
    Stream rng = root.child(k);
    proc::ExchangeState st{0.0, 0};
    for (int n = 0; n < 3; ++n) st = proc::exchange_step(st, 1.0, w.sample(rng));
    zeros += st.r == 0.0 ? 1 : 0;
  }
  const double p = static_cast<double>(zeros) / reps;
  const double se = std::sqrt(0.4 * 0.6 / reps);
  detail = "P[R_3=0] = " + harness::format_number(p) + ", |err| / se = " + harness::format_number(std::abs(p - 0.4) / se);
  return std::abs(p - 0.4) <= 3.0 * se;
}

// AC3
bool coupling_chain(std::string& detail) {
  Stream rng(77'002);
  const std::vector<InnovationLaw> laws{InnovationLaw::log_pareto(1.0, 1.0), InnovationLaw::geometric(0.3),
                                        InnovationLaw::pareto_tail(1.5), InnovationLaw::poisson(4.0)};
  std::size_t violations = 0, states = 0;
  for (std::size_t s = 0; s < 1000; ++s) {
    const std::size_t d = 1 + static_cast<std::size_t>(rng.uniform() * 3.0);
    std::vector<env::Atom> atoms;
    for (int k = 0; k < 2; ++k) {
      Matrix a = random_positive(d, rng);
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j)
          if (rng.uniform() < 0.3) a(i, j) = 0.0;
      if (a.is_zero()) a(0, 0) = 1.0;
      atoms.push_back({a.scaled(0.95 * rng.uniform() / a.norm_inf()), 0.5});
    }
    const env::MatrixEnsemble ens(d, std::move(atoms));
    Stream path = rng.child(s);
    const auto rec = proc::simulate_ar(ens, laws[s % laws.size()].lifted(d), 1000, path);
    for (std::size_t n = 0; n < rec.norm.size(); ++n, ++states)
      for (std::size_t i = 0; i < d; ++i)
        if (!(rec.nvec[n][i] <= rec.m[n][i] && rec.m[n][i] <= rec.x[n][i])) ++violations;
  }
  detail = std::to_string(states) + " states, " + std::to_string(violations) + " violations";
  return violations == 0 && states >= 1'000'000;
}

// AC4
bool branching_mean(std::string& detail) {
  const auto ens = two_atoms();
  const auto ylaw = InnovationLaw::geometric(0.4).lifted(2);
  Stream setup(77'003);
  std::vector<Matrix> as(21);
  std::vector<Vector> ys(21);
  for (std::size_t n = 0; n <= 20; ++n) {
    if (n > 0) as[n] = ens.sample(setup);
    ys[n] = ylaw.sample_vector(setup);
  }
  // Coupled mean recursion with integer immigration.
  std::vector<Vector> x(21);
  x[0] = ys[0];
  for (std::size_t n = 1; n <= 20; ++n) {
    x[n] = multiply(as[n], x[n - 1]);
    for (int i = 0; i < 2; ++i) x[n][i] += ys[n][i];
  }
  const std::size_t reps = 10'000;
  std::vector<std::array<double, 2>> s1(21, {0, 0}), s2(21, {0, 0});
  Stream root(77'004);
  for (std::size_t r = 0; r < reps; ++r) {
    Stream rng = root.child(r);
    auto st = proc::branching_start(proc::floor_counts(ys[0]));
    for (std::size_t n = 0; n <= 20; ++n) {
      if (n > 0) proc::branching_step(st, as[n], proc::OffspringFamily::Poisson, proc::floor_counts(ys[n]), rng);
      for (int i = 0; i < 2; ++i) {
        const double z = static_cast<double>(st.z[i]);
        s1[n][i] += z;
        s2[n][i] += z * z;
      }
    }
  }
  double worst = 0.0;
  bool ok = true;
  for (std::size_t n = 0; n <= 20; ++n)
    for (int i = 0; i < 2; ++i) {
      const double mean = s1[n][i] / reps;
      const double se = std::sqrt(std::max(0.0, s2[n][i] / reps - mean * mean) / (reps - 1.0));
      const double gap = std::abs(mean - x[n][i]);
      if (se == 0.0) {
        ok = ok && gap < 1e-12;
      } else {
        worst = std::max(worst, gap / se);
        ok = ok && gap <= 5.0 * se;
      }
    }
  detail = "max |mean Z_n - X_n| / se = " + harness::format_number(worst);
  return ok;
}

// AC5
bool extinction(std::string& detail) {
  const auto ens = two_atoms();
  Stream setup(77'005);
  std::vector<Matrix> as(31);
  for (std::size_t n = 1; n <= 30; ++n) as[n] = ens.sample(setup);
  const std::size_t reps = 20'000;
  std::vector<std::size_t> alive(31, 0);
  Stream root(77'006);
  for (std::size_t r = 0; r < reps; ++r) {
    Stream rng = root.child(r);
    auto st = proc::branching_start({0, 1});
    for (std::size_t n = 1; n <= 30; ++n) {
      proc::branching_step(st, as[n], proc::OffspringFamily::Poisson, {0, 0}, rng);
      if (proc::total(st.z) == 0) break;
      ++alive[n];
    }
  }
  bool ok = true;
  Matrix prod = Matrix::identity(2);
  double worst = -INFINITY;
  for (std::size_t n = 1; n <= 30; ++n) {
    prod = as[n] * prod;
    const double p = static_cast<double>(alive[n]) / reps;
    const double sigma = std::sqrt(std::max(p * (1 - p), 1.0 / reps) / reps);
    const double bound = 2.0 * prod.norm_inf();
    worst = std::max(worst, p - bound);
    if (p > bound + 3.0 * sigma) ok = false;
  }
  const std::size_t lin_reps = 100'000;
  std::size_t survived = 0;
  Stream lin(77'007);
  for (std::size_t r = 0; r < lin_reps; ++r) {
    Stream rng = lin.child(r);
    auto st = proc::branching_start({1});
    for (int n = 0; n < 5; ++n) proc::branching_step(st, Matrix{{0.5}}, proc::OffspringFamily::Bernoulli, {0}, rng);
    survived += st.z[0] != 0 ? 1 : 0;
  }
  const double p5 = static_cast<double>(survived) / lin_reps, exact = 1.0 / 32.0;
  const double se = std::sqrt(exact * (1 - exact) / lin_reps);
  detail = "max P[B_n != 0] - d||A_n...A_1|| = " + harness::format_number(worst) + "; P[B_5 != 0] = " +
           harness::format_number(p5);
  return ok && std::abs(p5 - exact) <= 3.0 * se;
}

// AC6
bool lyapunov(std::string& detail) {
  env::LyapunovOptions o;
  o.steps = 5000;
  o.replicas = 4;
  const double err = std::abs(env::estimate_lyapunov(env::MatrixEnsemble::constant(Matrix{{0.3, 0.1}, {0.2, 0.4}}), o)
                                  .lambda_hat -
                              std::log(2.0));
  const env::MatrixEnsemble scalar(1, {{Matrix{{0.25}}, 0.5}, {Matrix{{0.5}}, 0.5}});
  const double exact = 1.5 * std::log(2.0);
  int covered = 0;
  for (std::uint64_t seed = 1001; seed <= 1100; ++seed) {
    env::LyapunovOptions s;
    s.steps = 2000;
    s.replicas = 32;
    s.seed = seed;
    const auto est = env::estimate_lyapunov(scalar, s);
    covered += std::abs(est.lambda_hat - exact) <= est.half_width ? 1 : 0;
  }
  detail = "constant err " + harness::format_number(err) + "; coverage " + std::to_string(covered) + "/100";
  return err < 1e-9 && covered >= 95;
}

// AC7
bool variation_battery(std::string& detail) {
  std::size_t violations = 0;
  auto check_pair = [&](const Matrix& a, const Matrix& b) {
    const Matrix ab = a * b;
    const double da = env::big_delta(a), db = env::big_delta(b), dab = env::big_delta(ab);
    const double d = static_cast<double>(a.dim());
    if (!le(dab, std::max(da, db))) ++violations;
    if (!le(dab, da * small_delta(b))) ++violations;
    if (!le(small_delta(ab), small_delta(a) * small_delta(b))) ++violations;
    if (!le(small_delta(a), d * da)) ++violations;
  };
  Stream rng(77'008);
  for (int k = 0; k < 10'000; ++k) {
    const std::size_t d = 2 + static_cast<std::size_t>(k % 4);
    const Matrix a = random_positive(d, rng), b = random_positive(d, rng);
    check_pair(a, b);
  }
  const auto ens = two_atoms();
  const auto support = ens.support();
  const auto pr = env::find_pr(ens, 6);
  if (!pr) {
    detail = "no positive K-product for K <= 6";
    return false;
  }
  // All products of length K, then every pair of them.
  std::vector<Matrix> layer{Matrix::identity(2)};
  for (std::size_t len = 0; len < std::max<std::size_t>(pr->k, 4); ++len) {
    std::vector<Matrix> next;
    for (const Matrix& g : layer)
      for (const Matrix& a : support) next.push_back(g * a);
    layer = std::move(next);
  }
  for (const Matrix& a : layer)
    for (const Matrix& b : layer) check_pair(a, b);
  for (const Matrix& a : support)
    if (!le(std::pow(pr->kappa, 1.0 / static_cast<double>(pr->k)), a.norm_inf())) ++violations;
  detail = "10000 random pairs + " + std::to_string(layer.size() * layer.size()) + " product pairs, " +
           std::to_string(violations) + " violations";
  return violations == 0;
}

// AC8
bool frog(std::string& detail) {
  const double a = proc::frog_rho(1.0, 0.25), b = proc::frog_rho(0.9, 0.5);
  const double root = (1.0 - std::sqrt(1.0 - 4.0 * 0.45 * 0.45)) / 0.9;
  bool ok = std::abs(a - 1.0 / 3.0) < 1e-12 && std::abs(b - root) < 1e-12;

  proc::FrogConfig bounded;
  bounded.p = 1.0;
  bounded.r = 0.25;
  bounded.sleep_law = InnovationLaw::discrete_table({0, 1, 2, 3}, {0.25, 0.25, 0.25, 0.25});
  const auto heavy_sc = scenario("frog_heavy");
  proc::FrogConfig heavy;
  heavy.p = heavy_sc.process.frog_p;
  heavy.r = heavy_sc.process.frog_r;
  heavy.sleep_law = *heavy_sc.process.innovation;
  heavy.wake_cap = heavy_sc.process.wake_cap;
  heavy.site_cap = heavy_sc.process.site_cap;
  // The heavy law must sit strictly on the transient side of the criterion.
  const auto v = cls::frog_verdict(heavy.p, heavy.r, heavy.sleep_law, 1.0);
  if (!(v.raabe_limit > 1.0)) ok = false;

  int clean = 0, capped = 0;
  Stream root_b(77'009), root_h(77'010);
  for (int s = 0; s < 1000; ++s) {
    Stream rb = root_b.child(s);
    clean += proc::simulate_frog(bounded, rb).truncated ? 0 : 1;
    Stream rh = root_h.child(s);
    capped += proc::simulate_frog(heavy, rh).truncated ? 1 : 0;
  }
  detail = "bounded untruncated " + std::to_string(clean) + "/1000; heavy capped " + std::to_string(capped) +
           "/1000 (Raabe limit " + harness::format_number(v.raabe_limit) + ")";
  return ok && clean == 1000 && capped >= 990;
}

// AC9
bool cookie(std::string& detail) {
  const std::vector<std::pair<std::string, std::string>> cases{
      {"cookie_left", "TransientLeft"}, {"cookie_right", "TransientRight"}, {"cookie_recurrent", "Recurrent"}};
  bool ok = true;
  for (const auto& [name, expected] : cases) {
    const auto sc = scenario(name);
    const auto j = harness::Json::parse(harness::run_validate(sc).report());
    const std::string got = j["classification"]["outcome"];
    const double div = j["probe"]["divergence_fraction"];
    const double drift = j["probe"]["mean_final_position"];
    detail += name + "=" + got + " div " + harness::format_number(div) + "; ";
    if (got != expected) ok = false;
    if (expected == "TransientLeft" && !(drift < 0.0 && div >= 0.99)) ok = false;
    if (expected == "TransientRight" && !(drift > 0.0 && div >= 0.99)) ok = false;
    if (expected != "Recurrent" && sc.probe.horizon != 100'000) ok = false;
  }
  return ok;
}

// AC10
bool selftest_suites(std::string& detail) {
  const auto t0 = Clock::now();
  const auto results = selftest::run_all();
  const std::vector<std::string> required{"anchor_invariance", "sufficient_consistency", "anchor_ratio_implication",
                                          "partial_product_monotonicity", "determinism"};
  int failed = 0;
  for (const auto& r : results) failed += r.passed ? 0 : 1;
  bool ok = failed == 0;
  for (const auto& name : required) {
    if (std::none_of(results.begin(), results.end(), [&](const auto& r) { return r.name == name && r.passed; }))
      ok = false;
  }
  const double secs = seconds_since(t0);
  detail = std::to_string(results.size() - failed) + "/" + std::to_string(results.size()) + " suites in " +
           harness::format_number(std::round(secs * 10) / 10) + " s";
  return ok && secs < 300.0;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<bool(std::string&)>>> criteria{
      {"AC1 AR phase table with probe agreement", phase_table},
      {"AC2 exchange identity P[R_3=0]=0.4", kesten_identity},
      {"AC3 coupling chain N<=M<=X", coupling_chain},
      {"AC4 branching mean identity", branching_mean},
      {"AC5 extinction upper bound and lineage", extinction},
      {"AC6 Lyapunov exponent", lyapunov},
      {"AC7 variation inequality battery", variation_battery},
      {"AC8 frog quadratic and truncation", frog},
      {"AC9 cookie walk trichotomy", cookie},
      {"AC10 property suites", selftest_suites},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    std::string detail;
    bool ok = false;
    try {
      ok = check(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    failures += ok ? 0 : 1;
    std::printf("[%s] %s: %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
