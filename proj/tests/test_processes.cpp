#include <gtest/gtest.h>

#include <cmath>

#include "core/processes.hpp"
#include "test_util.hpp"

using namespace arrec;
using dist::InnovationLaw;
using env::MatrixEnsemble;
using arrec::testing::code_of;

namespace {

MatrixEnsemble reference() {
  return MatrixEnsemble(2, {{Matrix{{0.5, 0.4}, {0.3, 0.5}}, 0.5}, {Matrix{{0.6, 0.2}, {0.4, 0.4}}, 0.5}});
}

Matrix random_matrix(std::size_t d, Stream& rng, double scale) {
  Matrix a(d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) a(i, j) = rng.uniform() < 0.3 ? 0.0 : rng.uniform();
  if (a.is_zero()) a(0, 0) = 1.0;
  return a.scaled(scale / a.norm_inf());
}

}  // namespace

TEST(ArStep, ScalarArithmetic) {
  proc::ArChain chain({2.0});
  chain.step(Matrix{{0.5}}, {1.0});
  EXPECT_EQ(chain.state().x[0], 2.0);
  EXPECT_EQ(chain.state().m[0], 1.0);
  EXPECT_EQ(chain.state().nvec[0], 1.0);
  EXPECT_EQ(chain.state().step, 1u);
}

TEST(ArStep, DimensionMismatch) {
  proc::ArChain chain({1.0, 1.0});
  EXPECT_EQ(code_of([&] { chain.step(Matrix{{0.5}}, {1.0}); }), ErrorCode::DimensionMismatch);
  EXPECT_EQ(code_of([&] { chain.step(Matrix(2, 0.1), {1.0}); }), ErrorCode::DimensionMismatch);
}

TEST(ArStep, ClosedFormScalar) {
  Stream rng(3);
  std::vector<double> a(101), y(101);
  for (std::size_t k = 0; k <= 100; ++k) {
    a[k] = rng.uniform();
    y[k] = 5.0 * rng.uniform();
  }
  proc::ArChain chain({y[0]});
  for (std::size_t k = 1; k <= 100; ++k) chain.step(Matrix{{a[k]}}, {y[k]});
  // Independent oracle: sum_m a_n...a_{m+1} y_m accumulated backwards.
  double oracle = 0.0, prod = 1.0;
  for (std::size_t m = 100;; --m) {
    oracle += prod * y[m];
    if (m == 0) break;
    prod *= a[m];
  }
  EXPECT_NEAR(chain.state().x[0], oracle, 1e-12 * std::max(1.0, oracle));
  EXPECT_NEAR(proc::scalar_closed_form(a, y), oracle, 1e-12 * std::max(1.0, oracle));
}

TEST(ArStep, MaxTermsMatchBruteForce) {
  // N_n = max_m A_n...A_{m+1} Y_m, recomputed from scratch at every step.
  Stream rng(21);
  for (std::size_t d : {2u, 3u}) {
    std::vector<Matrix> as;
    std::vector<Vector> ys;
    ys.push_back(Vector(d));
    for (double& v : ys[0]) v = rng.uniform();
    proc::ArChain chain(ys[0]);
    as.push_back(Matrix(d));
    for (std::size_t n = 1; n <= 60; ++n) {
      as.push_back(random_matrix(d, rng, 1.1));
      Vector y(d);
      for (double& v : y) v = rng.uniform() < 0.5 ? 0.0 : rng.uniform();
      ys.push_back(y);
      chain.step(as[n], y);
      Vector best(d, 0.0), m_oracle = ys[0];
      for (std::size_t m = 0; m <= n; ++m) {
        Vector v = ys[m];
        for (std::size_t k = m + 1; k <= n; ++k) v = multiply(as[k], v);
        for (std::size_t i = 0; i < d; ++i) best[i] = std::max(best[i], v[i]);
      }
      for (std::size_t k = 1; k <= n; ++k) {
        const Vector am = multiply(as[k], m_oracle);
        for (std::size_t i = 0; i < d; ++i) m_oracle[i] = std::max(am[i], ys[k][i]);
      }
      for (std::size_t i = 0; i < d; ++i) {
        EXPECT_NEAR(chain.state().nvec[i], best[i], 1e-12 * std::max(1.0, best[i]));
        EXPECT_NEAR(chain.state().m[i], m_oracle[i], 1e-12 * std::max(1.0, m_oracle[i]));
      }
    }
  }
}

TEST(SimulateAr, ConstantHalfUnitInnovation) {
  Stream rng(1);
  const auto rec = proc::simulate_ar(MatrixEnsemble::constant(Matrix{{0.5}}), InnovationLaw::deterministic(1.0), 10, rng);
  ASSERT_EQ(rec.steps(), 10u);
  EXPECT_NEAR(rec.x[10][0], 2.0 - std::ldexp(1.0, -10), 1e-15);
  for (const auto& m : rec.m) EXPECT_EQ(m[0], 1.0);
  EXPECT_EQ(rec.env[0], -1);
  EXPECT_EQ(rec.env[5], 0);
}

TEST(SimulateAr, CouplingOrderOnRandomSpecs) {
  Stream rng(99);
  const InnovationLaw laws[] = {InnovationLaw::log_pareto(1.0, 0.5), InnovationLaw::geometric(0.3),
                                InnovationLaw::pareto_tail(1.0), InnovationLaw::deterministic(0.0)};
  for (int s = 0; s < 200; ++s) {
    const std::size_t d = 1 + s % 3;
    std::vector<env::Atom> atoms{{random_matrix(d, rng, 1.5 * rng.uniform()), 0.5},
                                 {random_matrix(d, rng, 1.5 * rng.uniform()), 0.5}};
    const MatrixEnsemble ens(d, std::move(atoms));
    Stream path = rng.child(s);
    const auto rec = proc::simulate_ar(ens, laws[s % 4], 500, path);
    for (std::size_t n = 0; n <= 500; ++n)
      for (std::size_t i = 0; i < d; ++i) {
        EXPECT_LE(rec.nvec[n][i], rec.m[n][i]);
        EXPECT_LE(rec.m[n][i], rec.x[n][i]);
      }
  }
}

TEST(SimulateAr, Deterministic) {
  const auto ens = reference();
  Stream a(77), b(77);
  const auto r1 = proc::simulate_ar(ens, InnovationLaw::log_pareto(1.0, 1.0), 300, a);
  const auto r2 = proc::simulate_ar(ens, InnovationLaw::log_pareto(1.0, 1.0), 300, b);
  EXPECT_EQ(r1.x, r2.x);
  EXPECT_EQ(r1.nvec, r2.nvec);
  EXPECT_EQ(r1.env, r2.env);
}

TEST(SimulateAr, SaturatesInsteadOfOverflowing) {
  Stream rng(4);
  const auto rec = proc::simulate_ar(MatrixEnsemble::constant(Matrix{{0.5}}), InnovationLaw::log_pareto(1.0, 0.1), 2000, rng);
  for (double v : rec.norm) EXPECT_TRUE(std::isfinite(v));
}

TEST(Branching, EmptyStaysEmpty) {
  Stream rng(1);
  auto st = proc::branching_start({0, 0});
  for (int n = 0; n < 10; ++n) proc::branching_step(st, Matrix(2, 0.7), proc::OffspringFamily::Poisson, {0, 0}, rng);
  EXPECT_EQ(proc::total(st.z), 0u);
  EXPECT_TRUE(st.cohorts.empty());
}

TEST(Branching, LineageSurvival) {
  const int reps = 40000;
  Stream root(6);
  int alive = 0;
  for (int r = 0; r < reps; ++r) {
    Stream rng = root.child(r);
    auto st = proc::branching_start({1});
    for (int n = 0; n < 5; ++n) proc::branching_step(st, Matrix{{0.5}}, proc::OffspringFamily::Bernoulli, {0}, rng);
    EXPECT_LE(st.z[0], 1u);
    alive += st.z[0] != 0 ? 1 : 0;
  }
  const double p = 1.0 / 32.0;
  EXPECT_NEAR(alive / double(reps), p, 3.0 * std::sqrt(p * (1 - p) / reps));
}

TEST(Branching, CohortSumAndImmigration) {
  Stream rng(8);
  auto st = proc::branching_start({3, 1});
  for (int n = 1; n <= 30; ++n) {
    proc::branching_step(st, Matrix{{0.5, 0.4}, {0.3, 0.5}}, proc::OffspringFamily::Geometric, {1, 2}, rng);
    proc::Counts sum(2, 0);
    for (const auto& c : st.cohorts) {
      sum[0] += c[0];
      sum[1] += c[1];
    }
    EXPECT_EQ(sum, st.z);
    ASSERT_FALSE(st.cohorts.empty());
    EXPECT_EQ(st.cohorts.back(), (proc::Counts{1, 2}));  // newest cohort is this step's immigrants
    EXPECT_EQ(st.cohort_born.back(), static_cast<std::size_t>(n));
  }
}

TEST(Branching, MeanIdentity) {
  const auto ens = reference();
  Stream setup(12);
  std::vector<Matrix> as(11);
  std::vector<proc::Counts> ys(11);
  for (int n = 0; n <= 10; ++n) {
    if (n > 0) as[n] = ens.sample(setup);
    ys[n] = {static_cast<std::uint64_t>(n % 3), 1};
  }
  // X_n with the realized A_n and integer Y_n.
  std::vector<Vector> x(11);
  x[0] = {double(ys[0][0]), double(ys[0][1])};
  for (int n = 1; n <= 10; ++n) {
    x[n] = multiply(as[n], x[n - 1]);
    x[n][0] += ys[n][0];
    x[n][1] += ys[n][1];
  }
  const int reps = 4000;
  std::vector<std::array<double, 2>> sum(11), sq(11);
  Stream root(13);
  for (int r = 0; r < reps; ++r) {
    Stream rng = root.child(r);
    auto st = proc::branching_start(ys[0]);
    for (int n = 1; n <= 10; ++n) {
      proc::branching_step(st, as[n], proc::OffspringFamily::Poisson, ys[n], rng);
      for (int i = 0; i < 2; ++i) {
        sum[n][i] += double(st.z[i]);
        sq[n][i] += double(st.z[i]) * double(st.z[i]);
      }
    }
  }
  for (int n = 1; n <= 10; ++n)
    for (int i = 0; i < 2; ++i) {
      const double mean = sum[n][i] / reps;
      const double se = std::sqrt((sq[n][i] / reps - mean * mean) / reps);
      EXPECT_LE(std::abs(mean - x[n][i]), 5.0 * se) << "n=" << n << " i=" << i;
    }
}

TEST(Branching, Errors) {
  Stream rng(1);
  auto st = proc::branching_start({1});
  EXPECT_EQ(code_of([&] { proc::branching_step(st, Matrix{{1.5}}, proc::OffspringFamily::Bernoulli, {0}, rng); }),
            ErrorCode::InvalidArgument);
  auto big = proc::branching_start({1000});
  EXPECT_EQ(code_of([&] {
              for (int n = 0; n < 100; ++n)
                proc::branching_step(big, Matrix{{3.0}}, proc::OffspringFamily::Poisson, {0}, rng, 100000);
            }),
            ErrorCode::PopulationOverflow);
}

TEST(Branching, OffspringVariance) {
  EXPECT_EQ(proc::offspring_variance(proc::OffspringFamily::Poisson, 0.7), 0.7);
  EXPECT_NEAR(proc::offspring_variance(proc::OffspringFamily::Bernoulli, 0.7), 0.21, 1e-15);
  EXPECT_NEAR(proc::offspring_variance(proc::OffspringFamily::Geometric, 0.7), 0.7 * 1.7, 1e-15);
  // Types reproduce independently, so each covariance matrix is diagonal and
  // its norm is the largest single variance: the largest mean for Poisson.
  EXPECT_NEAR(proc::offspring_gamma2(proc::OffspringFamily::Poisson, reference()), 0.6, 1e-15);
}

TEST(Exchange, StepArithmetic) {
  const auto st = proc::exchange_step({5.0, 0}, 1.0, 3.0);
  EXPECT_EQ(st.r, 4.0);
  EXPECT_EQ(st.step, 1u);
  EXPECT_EQ(proc::exchange_step({5.0, 0}, 1.0, 6.0).r, 6.0);
}

TEST(Exchange, KestenIdentity) {
  const auto w = InnovationLaw::discrete_table({0, 1, 2}, {0.5, 0.3, 0.2});
  const int reps = 50000;
  Stream root(31);
  int zeros[4] = {0, 0, 0, 0};
  for (int r = 0; r < reps; ++r) {
    Stream rng = root.child(r);
    proc::ExchangeState st{0.0, 0};
    for (int n = 1; n <= 3; ++n) {
      const double wv = w.sample(rng);
      st = proc::exchange_step(st, 1.0, wv);
      EXPECT_GE(st.r, wv);
      if (st.r == 0.0) ++zeros[n];
    }
  }
  const double exact[4] = {1.0, 0.5, 0.5 * 0.8, 0.5 * 0.8 * 1.0};
  for (int n = 1; n <= 3; ++n) {
    const double se = std::sqrt(exact[n] * (1 - exact[n]) / reps);
    EXPECT_NEAR(zeros[n] / double(reps), exact[n], 3 * se);
  }
}

TEST(Exchange, ExponentialBridgeToMaxAr) {
  Stream rng(2);
  proc::ExchangeState st{std::log(2.0), 0};
  proc::ArChain chain({2.0});
  for (int n = 0; n < 500; ++n) {
    const double t = rng.uniform();
    const double w = 3.0 * rng.uniform() - 1.0;
    st = proc::exchange_step(st, t, w);
    chain.step(Matrix{{std::exp(-t)}}, {std::exp(w)});
    EXPECT_NEAR(std::exp(st.r), chain.state().m[0], 1e-12 * chain.state().m[0]);
  }
}
