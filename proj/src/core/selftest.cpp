#include "core/selftest.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "core/classify.hpp"
#include "core/error.hpp"
#include "core/frog.hpp"
#include "core/probe.hpp"
#include "core/processes.hpp"
#include "core/report.hpp"

namespace arrec::selftest {

namespace {

using dist::InnovationLaw;

constexpr double kRelTol = 1e-10;

bool le(double lhs, double rhs) { return lhs <= rhs * (1.0 + kRelTol) || lhs <= rhs; }

std::string str(double v) { return harness::format_number(v); }

Matrix random_positive(std::size_t d, Stream& rng) {
  Matrix a(d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) a(i, j) = std::exp(6.0 * rng.uniform() - 3.0);
  }
  return a;
}

// Nonnegative and nonzero, roughly a third of the entries zeroed.
Matrix random_sparse(std::size_t d, Stream& rng) {
  Matrix a = random_positive(d, rng);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      if (rng.uniform() < 0.33) a(i, j) = 0.0;
    }
  }
  if (a.is_zero()) a(0, 0) = 1.0;
  return a;
}

double delta_of(const Matrix& a) { return env::variation_stats(a).delta; }

// Every ordered product of length 1..max_len over the support.
std::vector<Matrix> products(const std::vector<Matrix>& support, std::size_t max_len) {
  std::vector<Matrix> all;
  std::vector<Matrix> layer{Matrix::identity(support.front().dim())};
  for (std::size_t len = 1; len <= max_len; ++len) {
    std::vector<Matrix> next;
    for (const Matrix& g : layer) {
      for (const Matrix& a : support) next.push_back(g * a);
    }
    all.insert(all.end(), next.begin(), next.end());
    layer = std::move(next);
  }
  return all;
}

double log_partial_product(const InnovationLaw& law, double y, double lambda, std::size_t n) {
  double s = 0.0;
  for (std::size_t m = 0; m <= n; ++m) s += std::log(law.cdf_log(std::log(y) + static_cast<double>(m) * lambda));
  return s;
}

// KS distance of log-scale samples from a continuous law.
double ks_log(const InnovationLaw& law, std::vector<double> logs) {
  std::sort(logs.begin(), logs.end());
  const double n = static_cast<double>(logs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < logs.size(); ++i) {
    const double f = law.cdf_log(logs[i]);
    d = std::max({d, std::abs(f - static_cast<double>(i) / n), std::abs(static_cast<double>(i + 1) / n - f)});
  }
  return d;
}

std::string suite_variation_random(bool& ok) {
  Stream rng(20'240'001);
  std::size_t violations = 0;
  const std::size_t pairs = 10'000;
  for (std::size_t k = 0; k < pairs; ++k) {
    const std::size_t d = 2 + k % 3;
    const Matrix a = random_positive(d, rng);
    const Matrix b = random_positive(d, rng);
    const Matrix ab = a * b;
    const double da = env::big_delta(a), db = env::big_delta(b), dab = env::big_delta(ab);
    if (!le(dab, std::max(da, db))) ++violations;
    if (!le(dab, da * delta_of(b))) ++violations;
    if (!le(delta_of(ab), delta_of(a) * delta_of(b))) ++violations;
    if (!le(delta_of(a), static_cast<double>(d) * da)) ++violations;
    // The two product bounds also allow a nonnegative right factor.
    const Matrix s = random_sparse(d, rng);
    const Matrix as = a * s;
    if (as.is_positive() && !le(env::big_delta(as), da * delta_of(s))) ++violations;
    if (!le(delta_of(as), delta_of(a) * delta_of(s))) ++violations;
  }
  ok = violations == 0;
  return std::to_string(pairs) + " random pairs, " + std::to_string(violations) + " violations";
}

std::string suite_variation_products(bool& ok) {
  const env::MatrixEnsemble ens = reference_ensemble();
  const std::size_t d = ens.dim();
  const std::vector<Matrix> support = ens.support();
  const std::vector<Matrix> all = products(support, 6);
  std::size_t violations = 0;

  const std::vector<Matrix> short_products = products(support, 3);
  for (const Matrix& a : short_products) {
    for (const Matrix& b : short_products) {
      const Matrix ab = a * b;
      if (!le(env::big_delta(ab), std::max(env::big_delta(a), env::big_delta(b)))) ++violations;
      if (!le(env::big_delta(ab), env::big_delta(a) * delta_of(b))) ++violations;
      if (!le(delta_of(ab), delta_of(a) * delta_of(b))) ++violations;
    }
  }

  // Norm lower bounds ||G|| ||x|| <= c ||Gx|| and ||G|| ||B|| <= c ||GB||
  // with c = d sup delta over the enumerated products.
  double sup_delta = 1.0;
  for (const Matrix& g : all) sup_delta = std::max(sup_delta, delta_of(g));
  const double c = static_cast<double>(d) * sup_delta;
  Stream rng(20'240'002);
  for (const Matrix& g : all) {
    if (!le(delta_of(g), static_cast<double>(d) * env::big_delta(g))) ++violations;
    for (int t = 0; t < 50; ++t) {
      Vector x(d);
      for (double& v : x) v = rng.uniform() < 0.3 ? 0.0 : rng.uniform();
      if (norm_inf(x) == 0.0) x[0] = 1.0;
      if (!le(g.norm_inf() * norm_inf(x), c * norm_inf(multiply(g, x)))) ++violations;
      const Matrix b = random_sparse(d, rng);
      if (!le(g.norm_inf() * b.norm_inf(), c * (g * b).norm_inf())) ++violations;
    }
  }

  // kappa^{1/K} <= ||A|| with the smallest K for which every K-product is positive.
  const auto pr = env::find_pr(ens, 6);
  if (!pr) {
    ok = false;
    return "reference ensemble has a K-product with a zero entry for every K <= 6";
  }
  for (const Matrix& a : support) {
    if (!le(std::pow(pr->kappa, 1.0 / static_cast<double>(pr->k)), a.norm_inf())) ++violations;
  }
  ok = violations == 0;
  return std::to_string(all.size()) + " products, c = " + str(c) + ", K = " + std::to_string(pr->k) +
         ", kappa = " + str(pr->kappa) + ", " + std::to_string(violations) + " violations";
}

std::string suite_lyapunov(bool& ok) {
  std::ostringstream out;
  ok = true;
  const Matrix a{{0.3, 0.1}, {0.2, 0.4}};
  for (std::size_t n : {200u, 1000u, 5000u}) {
    env::LyapunovOptions opts;
    opts.steps = n;
    opts.replicas = 2;
    const auto est = env::estimate_lyapunov(env::MatrixEnsemble::constant(a), opts);
    const double err = std::abs(est.lambda_hat - std::log(2.0));
    if (!(err < 1e-9)) ok = false;
    out << "n=" << n << " err=" << str(err) << "; ";
  }
  const double rho = env::spectral_radius(a).rho;
  if (!(std::abs(rho - 0.5) < 1e-12)) ok = false;

  const env::MatrixEnsemble two(1, {{Matrix{{0.25}}, 0.5}, {Matrix{{0.5}}, 0.5}});
  const double exact = 1.5 * std::log(2.0);
  if (std::abs(env::scalar_lyapunov(two) - exact) > 1e-15) ok = false;
  int covered = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    env::LyapunovOptions opts;
    opts.steps = 1000;
    opts.replicas = 32;
    opts.seed = seed;
    opts.burn_in_fraction = 0.0;
    const auto est = env::estimate_lyapunov(two, opts);
    if (std::abs(est.lambda_hat - exact) <= est.half_width) ++covered;
  }
  if (covered < 95) ok = false;
  out << "scalar CI coverage " << covered << "/100";
  return out.str();
}

std::string suite_concentration(bool& ok) {
  const auto prof = env::concentration_profile(reference_ensemble(), 400, 2000, 7, {1.0, 2.0, 3.0});
  ok = prof.sigma_hat > 0.0;
  for (std::size_t k = 1; k < prof.frequencies.size(); ++k) {
    if (prof.frequencies[k] > prof.frequencies[k - 1]) ok = false;
  }
  std::ostringstream out;
  out << "sigma_hat=" << str(prof.sigma_hat) << " freq=";
  for (double f : prof.frequencies) out << str(f) << " ";
  return out.str();
}

std::string suite_coupling(bool& ok) {
  Stream rng(20'240'003);
  const auto laws = builtin_laws();
  std::size_t steps_checked = 0;
  std::size_t violations = 0;
  for (std::size_t s = 0; s < 1000; ++s) {
    const std::size_t d = 1 + s % 3;
    const std::size_t n_atoms = 1 + static_cast<std::size_t>(rng.uniform() * 3.0);
    std::vector<env::Atom> atoms;
    for (std::size_t k = 0; k < n_atoms; ++k) {
      Matrix a = random_sparse(d, rng);
      atoms.push_back({a.scaled(0.9 * rng.uniform() / a.norm_inf()), 1.0 / static_cast<double>(n_atoms)});
    }
    const env::MatrixEnsemble ens(d, std::move(atoms));
    const InnovationLaw& law = laws[s % laws.size()].law;
    if (law.kind() == dist::Kind::ScaledVector && law.dim() != d) continue;
    Stream path = rng.child(s);
    const auto rec = proc::simulate_ar(ens, law, 1000, path);
    for (std::size_t n = 0; n < rec.norm.size(); ++n) {
      for (std::size_t i = 0; i < d; ++i) {
        if (!(rec.nvec[n][i] <= rec.m[n][i] && rec.m[n][i] <= rec.x[n][i])) ++violations;
      }
      ++steps_checked;
    }
  }
  ok = violations == 0;
  return std::to_string(steps_checked) + " states checked, " + std::to_string(violations) + " violations";
}

std::string suite_closed_form(bool& ok) {
  ok = true;
  Stream rng(20'240'004);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> a(101), y(101);
    for (std::size_t k = 0; k <= 100; ++k) {
      a[k] = 0.99 * rng.uniform();
      y[k] = rng.uniform() * 10.0;
    }
    proc::ArChain chain({y[0]});
    for (std::size_t k = 1; k <= 100; ++k) chain.step(Matrix{{a[k]}}, {y[k]});
    const double closed = proc::scalar_closed_form(a, y);
    worst = std::max(worst, std::abs(chain.state().x[0] - closed) / std::max(1.0, closed));
  }
  if (worst > 100 * 1e-13) ok = false;

  // d = 2: sum of transported innovations with explicit left products.
  double worst2 = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Matrix> as(101);
    std::vector<Vector> ys(101);
    for (std::size_t k = 0; k <= 100; ++k) {
      Matrix m = random_sparse(2, rng);
      as[k] = m.scaled(0.95 / m.norm_inf());
      ys[k] = {rng.uniform() * 5.0, rng.uniform() * 5.0};
    }
    proc::ArChain chain(ys[0]);
    for (std::size_t k = 1; k <= 100; ++k) chain.step(as[k], ys[k]);
    Vector sum(2, 0.0);
    for (std::size_t m = 0; m <= 100; ++m) {
      Vector v = ys[m];
      for (std::size_t k = m + 1; k <= 100; ++k) v = multiply(as[k], v);
      sum[0] += v[0];
      sum[1] += v[1];
    }
    for (int i = 0; i < 2; ++i) {
      worst2 = std::max(worst2, std::abs(chain.state().x[i] - sum[i]) / std::max(1.0, sum[i]));
    }
  }
  if (worst2 > 100 * 1e-13) ok = false;

  // Constant 0.5 with unit innovations: X_10 = 2 - 2^-10 and M_n = 1.
  proc::ArChain chain({1.0});
  bool m_ok = true;
  for (int n = 1; n <= 10; ++n) {
    chain.step(Matrix{{0.5}}, {1.0});
    if (chain.state().m[0] != 1.0) m_ok = false;
  }
  if (chain.state().x[0] != 2.0 - std::ldexp(1.0, -10) || !m_ok) ok = false;
  return "scalar rel err " + str(worst) + ", d=2 rel err " + str(worst2) + ", X_10 = " + str(chain.state().x[0]);
}

std::string suite_kesten(bool& ok) {
  const InnovationLaw w = InnovationLaw::discrete_table({0, 1, 2}, {0.5, 0.3, 0.2});
  const std::size_t reps = 100'000;
  Stream root(20'240'005);
  std::size_t zeros = 0;
  for (std::size_t k = 0; k < reps; ++k) {
    Stream rng = root.child(k);
    proc::ExchangeState st{0.0, 0};
    for (int n = 0; n < 3; ++n) st = proc::exchange_step(st, 1.0, w.sample(rng));
    if (st.r == 0.0) ++zeros;
  }
  const double p_hat = static_cast<double>(zeros) / static_cast<double>(reps);
  double exact = 1.0;
  for (int m = 0; m < 3; ++m) exact *= w.cdf(m);
  const double se = std::sqrt(exact * (1.0 - exact) / static_cast<double>(reps));
  ok = std::abs(exact - 0.4) < 1e-12 && std::abs(p_hat - exact) <= 3.0 * se;

  // e^R is the scalar max-AR chain with a = e^-T and y = e^W.
  Stream rng(20'240'006);
  double worst = 0.0;
  proc::ExchangeState st{0.0, 0};
  proc::ArChain chain({1.0});
  for (int n = 0; n < 1000; ++n) {
    const double t = rng.uniform() * 0.5;
    const double wv = std::log(1.0 + 3.0 * rng.uniform());
    st = proc::exchange_step(st, t, wv);
    chain.step(Matrix{{std::exp(-t)}}, {std::exp(wv)});
    worst = std::max(worst, std::abs(std::exp(st.r) - chain.state().m[0]) / chain.state().m[0]);
  }
  if (worst > 1e-12) ok = false;
  return "P[R_3=0] = " + str(p_hat) + " vs " + str(exact) + " (3se " + str(3 * se) + "); bridge rel err " + str(worst);
}

std::string suite_branching_mean(bool& ok) {
  const env::MatrixEnsemble ens = reference_ensemble();
  Stream setup(20'240'007);
  const InnovationLaw ylaw = InnovationLaw::poisson(2.0).lifted(2);
  std::vector<Matrix> as(21);
  std::vector<Vector> ys(21);
  for (std::size_t n = 0; n <= 20; ++n) {
    if (n > 0) as[n] = ens.sample(setup);
    ys[n] = ylaw.sample_vector(setup);
  }
  std::vector<Vector> x(21);
  proc::ArChain chain(ys[0]);
  x[0] = ys[0];
  for (std::size_t n = 1; n <= 20; ++n) {
    chain.step(as[n], ys[n]);
    x[n] = chain.state().x;
  }
  const std::size_t reps = 10'000;
  std::vector<std::vector<double>> sum(21, std::vector<double>(2, 0.0)), sq = sum;
  Stream root(20'240'008);
  for (std::size_t r = 0; r < reps; ++r) {
    Stream rng = root.child(r);
    proc::BranchingState st = proc::branching_start(proc::floor_counts(ys[0]));
    for (std::size_t n = 0; n <= 20; ++n) {
      if (n > 0) proc::branching_step(st, as[n], proc::OffspringFamily::Poisson, proc::floor_counts(ys[n]), rng);
      for (int i = 0; i < 2; ++i) {
        const double z = static_cast<double>(st.z[i]);
        sum[n][i] += z;
        sq[n][i] += z * z;
      }
    }
  }
  double worst = 0.0;
  ok = true;
  const double rn = static_cast<double>(reps);
  for (std::size_t n = 0; n <= 20; ++n) {
    for (int i = 0; i < 2; ++i) {
      const double mean = sum[n][i] / rn;
      const double var = std::max(0.0, (sq[n][i] - rn * mean * mean) / (rn - 1.0));
      const double se = std::sqrt(var / rn);
      const double gap = std::abs(mean - x[n][i]);
      if (se == 0.0) {
        if (gap > 1e-12) ok = false;
      } else {
        worst = std::max(worst, gap / se);
        if (gap > 5.0 * se) ok = false;
      }
    }
  }
  return "max |mean Z - X| / se over n <= 20: " + str(worst);
}

std::string suite_extinction(bool& ok) {
  const env::MatrixEnsemble ens = reference_ensemble();
  const std::size_t d = ens.dim();
  Stream setup(20'240'009);
  std::vector<Matrix> as(31);
  for (std::size_t n = 1; n <= 30; ++n) as[n] = ens.sample(setup);

  const std::size_t reps = 20'000;
  std::vector<std::size_t> alive(31, 0);
  Stream root(20'240'010);
  for (std::size_t r = 0; r < reps; ++r) {
    Stream rng = root.child(r);
    proc::BranchingState st = proc::branching_start({1, 0});
    for (std::size_t n = 1; n <= 30; ++n) {
      proc::branching_step(st, as[n], proc::OffspringFamily::Poisson, {0, 0}, rng);
      if (proc::total(st.z) == 0) break;
      ++alive[n];
    }
  }
  ok = true;
  double min_ratio = INFINITY;
  const double rn = static_cast<double>(reps);
  for (std::size_t n = 1; n <= 30; ++n) {
    Matrix prod = Matrix::identity(d);
    double tail_sum = 0.0;  // sum_{k<=n} ||A_n ... A_k||
    for (std::size_t k = n; k >= 1; --k) {
      prod = prod * as[k];
      tail_sum += prod.norm_inf();
    }
    const double full = prod.norm_inf();  // ||A_n ... A_1||
    const double p_hat = static_cast<double>(alive[n]) / rn;
    const double sigma = std::sqrt(std::max(p_hat * (1.0 - p_hat), 1.0 / rn) / rn);
    if (p_hat > static_cast<double>(d) * full + 3.0 * sigma) ok = false;
    if (alive[n] >= 30) min_ratio = std::min(min_ratio, p_hat * tail_sum / full);
  }
  if (!(min_ratio > 0.05)) ok = false;

  // One founder, Bernoulli(0.5) offspring: the lineage survives n steps with probability 0.5^n.
  const std::size_t lineage_reps = 100'000;
  std::size_t survived = 0;
  Stream lin(20'240'011);
  const Matrix half{{0.5}};
  for (std::size_t r = 0; r < lineage_reps; ++r) {
    Stream rng = lin.child(r);
    proc::BranchingState st = proc::branching_start({1});
    for (int n = 0; n < 5; ++n) proc::branching_step(st, half, proc::OffspringFamily::Bernoulli, {0}, rng);
    if (st.z[0] != 0) ++survived;
  }
  const double p5 = static_cast<double>(survived) / static_cast<double>(lineage_reps);
  const double exact = std::pow(0.5, 5);
  const double se = std::sqrt(exact * (1 - exact) / static_cast<double>(lineage_reps));
  if (std::abs(p5 - exact) > 3.0 * se) ok = false;
  return "min lower-bound ratio " + str(min_ratio) + "; lineage P[B_5 != 0] = " + str(p5);
}

std::string suite_ks(bool& ok) {
  ok = true;
  const double band = 1.95 / std::sqrt(1e5);
  std::ostringstream out;
  Stream root(20'240'012);
  std::uint64_t index = 0;
  for (const NamedLaw& nl : builtin_laws()) {
    if (nl.law.kind() == dist::Kind::ScaledVector) continue;
    Stream rng = root.child(index++);
    std::vector<double> sample(100'000);
    double ks = 0.0;
    if (nl.law.kind() == dist::Kind::LogPareto || nl.law.kind() == dist::Kind::ParetoTail) {
      // Linear samples saturate at DBL_MAX for the heaviest tails; compare on the log scale.
      for (double& v : sample) v = nl.law.sample_log(rng);
      ks = ks_log(nl.law, sample);
    } else {
      for (double& v : sample) v = nl.law.sample(rng);
      ks = dist::ks_statistic(nl.law, sample);
    }
    if (!(ks < band)) {
      ok = false;
      out << nl.name << " KS=" << str(ks) << "; ";
    }
  }
  // Floor compatibility L(x) <= F(x + 1).
  for (const NamedLaw& nl : builtin_laws()) {
    if (nl.law.kind() == dist::Kind::ScaledVector) continue;
    const InnovationLaw floor_law = InnovationLaw::floor_of(nl.law);
    for (double x = 0.0; x <= 1000.0; x = x < 10.0 ? x + 0.25 : x * 1.1) {
      if (floor_law.cdf(x) > nl.law.cdf(x + 1.0) + 1e-15) {
        ok = false;
        out << nl.name << " floor violation at " << str(x) << "; ";
        break;
      }
    }
  }
  out << "band " << str(band);
  return out.str();
}

std::string suite_anchor_ratio(bool& ok) {
  ok = true;
  std::ostringstream out;
  const double lambda = std::log(2.0);
  for (const auto& law : {InnovationLaw::geometric(0.5), InnovationLaw::log_pareto(1.0, 2.0)}) {
    const double y = 10.0;
    const double first = law.cdf_log(std::log(y));
    const double partial = std::exp(log_partial_product(law, y, lambda, 10'000));
    if (!(partial >= first / 2.0)) ok = false;
    out << law.describe() << " prod_1e4/first = " << str(partial / first) << "; ";
  }
  std::size_t checked = 0;
  for (const NamedLaw& nl : builtin_laws()) {
    if (cls::effective_tail_class(nl.law).log_moment != dist::Moment::Finite) continue;
    for (double lam : {0.25, lambda, 2.0}) {
      const cls::Verdict v = cls::anchor_scan(nl.law, lam, {1.0, 10.0, 100.0});
      const bool disagrees = std::find(v.flags.begin(), v.flags.end(), "series_disagrees") != v.flags.end();
      if (!cls::is_recurrent(v.outcome) || disagrees) {
        ok = false;
        out << nl.name << " at lambda " << str(lam) << " gives " << cls::to_string(v.outcome) << "; ";
      }
      ++checked;
    }
  }
  out << checked << " finite-moment cases recurrent";
  return out.str();
}

std::string suite_anchor_invariance(bool& ok) {
  ok = true;
  std::size_t resolved = 0;
  std::ostringstream out;
  for (const NamedLaw& nl : builtin_laws()) {
    for (double lam : {0.25, std::log(2.0), 2.0}) {
      try {
        const cls::Verdict v = cls::anchor_scan(nl.law, lam, {1.0, 10.0, 100.0});
        if (v.outcome != cls::Outcome::Inconclusive) ++resolved;
      } catch (const Error& e) {
        ok = false;
        out << nl.name << ": " << e.what() << "; ";
      }
    }
  }
  out << resolved << " resolved law/lambda pairs agree across y in {1, 10, 100}";
  return out.str();
}

std::string suite_sufficient(bool& ok) {
  ok = true;
  std::size_t decided = 0;
  std::ostringstream out;
  for (const NamedLaw& nl : builtin_laws()) {
    for (double lam : {0.25, std::log(2.0), 2.0}) {
      const auto tc = cls::effective_tail_class(nl.law);
      const auto s = cls::sufficient_conditions(tc, lam);
      if (s.result != cls::Sufficient::Recurrent && s.result != cls::Sufficient::Transient) continue;
      const cls::Verdict v = cls::anchor_scan(nl.law, lam, {1.0, 10.0, 100.0});
      const bool want_rec = s.result == cls::Sufficient::Recurrent;
      if (v.outcome == cls::Outcome::Inconclusive || cls::is_recurrent(v.outcome) != want_rec) {
        ok = false;
        out << nl.name << " lambda " << str(lam) << ": " << cls::to_string(s.result) << " vs "
            << cls::to_string(v.outcome) << "; ";
      }
      ++decided;
    }
  }
  out << decided << " decided cases consistent";
  return out.str();
}

std::string suite_lambda_monotone(bool& ok) {
  ok = true;
  std::size_t paths = 0;
  for (double beta : {0.5, 1.0, 2.0}) {
    for (double p : {0.5, 1.0, 2.0}) {
      const InnovationLaw law = InnovationLaw::log_pareto(beta, p);
      bool seen_recurrent = false;
      for (double lam : {0.1, 0.3, 0.7, 1.5, 3.0, 6.0}) {
        const cls::Verdict v = cls::ar_verdict(law, lam, 1.0);
        if (cls::is_recurrent(v.outcome)) seen_recurrent = true;
        if (seen_recurrent && v.outcome == cls::Outcome::Transient) ok = false;
      }
      ++paths;
    }
  }
  return std::to_string(paths) + " LogPareto lambda paths, no recurrent-to-transient flip";
}

std::string suite_partial_monotone(bool& ok) {
  ok = true;
  std::size_t runs = 0;
  for (const NamedLaw& nl : builtin_laws()) {
    for (double y : {1.0, 10.0}) {
      try {
        const cls::Verdict v = cls::ar_verdict(nl.law, std::log(2.0), y);
        for (std::size_t k = 1; k < v.partial_log.size(); ++k) {
          if (v.partial_log[k].value > v.partial_log[k - 1].value) ok = false;
        }
        if (!v.partial_log.empty() && v.partial_log.front().value > 0.0) ok = false;
        ++runs;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::ZeroAnchor) throw;
      }
    }
  }
  return std::to_string(runs) + " runs with nonincreasing log partial products";
}

std::string suite_determinism(bool& ok) {
  const char* config = R"({
    "name": "determinism",
    "process": {"kind": "ar"},
    "ensemble": {"dim": 2, "atoms": [
      {"matrix": [[0.5, 0.4], [0.3, 0.5]], "p": 0.5},
      {"matrix": [[0.6, 0.2], [0.4, 0.4]], "p": 0.5}]},
    "innovation": {"kind": "log_pareto", "beta": 1.0, "p": 2.0},
    "classifier": {"n_max": 10000, "lyapunov": {"steps": 2000, "replicas": 8}},
    "probe": {"horizon": 1000, "replicas": 16, "seed": 3},
    "simulate": {"steps": 500}
  })";
  const harness::Scenario sc = harness::parse_scenario_text(config);
  const auto a = harness::run_simulate(sc, 42);
  const auto b = harness::run_simulate(sc, 42);
  bool same = a.files.size() == b.files.size();
  for (std::size_t k = 0; same && k < a.files.size(); ++k) same = a.files[k].data == b.files[k].data;

  env::LyapunovOptions lo = sc.classifier.lyapunov;
  lo.workers = 1;
  const auto l1 = env::estimate_lyapunov(*sc.process.ensemble, lo);
  lo.workers = 4;
  const auto l4 = env::estimate_lyapunov(*sc.process.ensemble, lo);
  const bool lyap_same = l1.per_replica == l4.per_replica && l1.lambda_hat == l4.lambda_hat;

  harness::ProbeSpec ps = sc.probe;
  ps.workers = 1;
  const auto p1 = harness::probe(sc.process, ps);
  ps.workers = 3;
  const auto p3 = harness::probe(sc.process, ps);
  const bool probe_same = p1.visits == p3.visits && p1.hint == p3.hint;

  const auto c1 = harness::run_classify(sc);
  const auto c2 = harness::run_classify(sc);
  const bool classify_same = c1.report() == c2.report();

  ok = same && lyap_same && probe_same && classify_same;
  return std::string("simulate ") + (same ? "identical" : "differs") + ", lyapunov " +
         (lyap_same ? "identical" : "differs") + ", probe " + (probe_same ? "identical" : "differs") +
         ", classify " + (classify_same ? "identical" : "differs");
}

std::string suite_frog(bool& ok) {
  const double a = proc::frog_rho(1.0, 0.25);
  const double b = proc::frog_rho(0.9, 0.5);
  const double root = (1.0 - std::sqrt(1.0 - 4.0 * 0.45 * 0.45)) / (2.0 * 0.45);
  ok = std::abs(a - 1.0 / 3.0) < 1e-12 && std::abs(b - root) < 1e-12 &&
       std::abs(0.45 * b * b - b + 0.45) < 1e-12;
  bool critical = false;
  try {
    proc::frog_rho(1.0, 0.5);
  } catch (const Error& e) {
    critical = e.code() == ErrorCode::CriticalRho;
  }
  if (!critical) ok = false;

  proc::FrogConfig cfg;
  cfg.p = 1.0;
  cfg.r = 0.25;
  cfg.sleep_law = InnovationLaw::discrete_table({0, 1, 2, 3}, {0.25, 0.25, 0.25, 0.25});
  std::size_t untruncated = 0;
  Stream base(20'240'013);
  for (std::uint64_t s = 0; s < 200; ++s) {
    Stream rng = base.child(s);
    if (!proc::simulate_frog(cfg, rng).truncated) ++untruncated;
  }
  if (untruncated != 200) ok = false;

  cfg.sleep_law = InnovationLaw::deterministic(0.0);
  Stream rng(1);
  if (proc::simulate_frog(cfg, rng).woken_count != 0) ok = false;
  return "rho(1,0.25)=" + str(a) + " rho(0.9,0.5)=" + str(b) + ", bounded sleep untruncated " +
         std::to_string(untruncated) + "/200";
}

}  // namespace

std::vector<NamedLaw> builtin_laws() {
  return {
      {"log_pareto(1,2)", InnovationLaw::log_pareto(1.0, 2.0)},
      {"log_pareto(1,1)", InnovationLaw::log_pareto(1.0, 1.0)},
      {"log_pareto(1,0.5)", InnovationLaw::log_pareto(1.0, 0.5)},
      {"log_pareto(0.5,1)", InnovationLaw::log_pareto(0.5, 1.0)},
      {"log_pareto(2,1)", InnovationLaw::log_pareto(2.0, 1.0)},
      {"pareto_tail(2)", InnovationLaw::pareto_tail(2.0)},
      {"geometric(0.5)", InnovationLaw::geometric(0.5)},
      {"poisson(3)", InnovationLaw::poisson(3.0)},
      {"deterministic(5)", InnovationLaw::deterministic(5.0)},
      {"discrete_table", InnovationLaw::discrete_table({0.0, 1.0, 2.0}, {0.5, 0.3, 0.2})},
      {"scaled_vector(log_pareto(1,2),2)", InnovationLaw::scaled_vector(InnovationLaw::log_pareto(1.0, 2.0), 2)},
      {"floor(log_pareto(1,1))", InnovationLaw::floor_of(InnovationLaw::log_pareto(1.0, 1.0))},
  };
}

env::MatrixEnsemble reference_ensemble() {
  return env::MatrixEnsemble(2, {{Matrix{{0.5, 0.4}, {0.3, 0.5}}, 0.5}, {Matrix{{0.6, 0.2}, {0.4, 0.4}}, 0.5}});
}

std::vector<Suite> suites() {
  return {
      {"variation_inequalities_random", suite_variation_random},
      {"variation_inequalities_products", suite_variation_products},
      {"lyapunov_consistency", suite_lyapunov},
      {"concentration_monotone", suite_concentration},
      {"coupling_chain", suite_coupling},
      {"closed_form", suite_closed_form},
      {"kesten_identity", suite_kesten},
      {"branching_mean_identity", suite_branching_mean},
      {"extinction_bounds", suite_extinction},
      {"sampling_ks", suite_ks},
      {"anchor_ratio_implication", suite_anchor_ratio},
      {"anchor_invariance", suite_anchor_invariance},
      {"sufficient_consistency", suite_sufficient},
      {"lambda_monotonicity", suite_lambda_monotone},
      {"partial_product_monotonicity", suite_partial_monotone},
      {"determinism", suite_determinism},
      {"frog_quadratic", suite_frog},
  };
}

SuiteResult run_suite(const Suite& suite) {
  SuiteResult r;
  r.name = suite.name;
  const auto start = std::chrono::steady_clock::now();
  try {
    bool ok = false;
    r.detail = suite.run(ok);
    r.passed = ok;
  } catch (const std::exception& e) {
    r.passed = false;
    r.detail = std::string("exception: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

std::vector<SuiteResult> run_all() {
  std::vector<SuiteResult> out;
  for (const Suite& s : suites()) out.push_back(run_suite(s));
  return out;
}

harness::Json results_json(const std::vector<SuiteResult>& results) {
  harness::Json arr = harness::Json::array();
  std::size_t passed = 0;
  for (const auto& r : results) {
    arr.push_back({{"name", r.name}, {"passed", r.passed}, {"detail", r.detail}, {"seconds", r.seconds}});
    if (r.passed) ++passed;
  }
  return {{"suites", arr}, {"passed", passed}, {"total", results.size()}};
}

}  // namespace arrec::selftest
