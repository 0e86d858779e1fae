#include <gtest/gtest.h>

#include <cmath>

#include "core/error.hpp"
#include "core/matrix_env.hpp"
#include "test_util.hpp"

using namespace arrec;
using env::MatrixEnsemble;
using arrec::testing::code_of;

namespace {

Matrix random_positive(std::size_t d, Stream& rng) {
  Matrix a(d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) a(i, j) = std::exp(4.0 * rng.uniform() - 2.0);
  return a;
}

}  // namespace

TEST(Ensemble, ConstantAlwaysReturnsItsMatrix) {
  const auto ens = MatrixEnsemble::constant(Matrix{{0.5}});
  Stream rng(3);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(ens.sample(rng)(0, 0), 0.5);
  EXPECT_TRUE(ens.is_constant());
}

TEST(Ensemble, TwoAtomFrequenciesWithinThreeSigma) {
  const MatrixEnsemble ens(1, {{Matrix{{0.25}}, 0.5}, {Matrix{{0.5}}, 0.5}});
  Stream rng(11);
  const int n = 10000;
  int first = 0;
  for (int i = 0; i < n; ++i) first += ens.sample_index(rng) == 0 ? 1 : 0;
  const double sigma = std::sqrt(n * 0.25);
  EXPECT_LE(std::abs(first - n / 2), 3 * sigma);
}

TEST(Ensemble, ZeroMassAtomNeverDrawn) {
  const MatrixEnsemble ens(1, {{Matrix{{0.1}}, 0.0}, {Matrix{{0.5}}, 1.0}, {Matrix{{0.9}}, 0.0}});
  Stream rng(5);
  for (int i = 0; i < 10000; ++i) EXPECT_EQ(ens.sample_index(rng), 1u);
  EXPECT_EQ(ens.support().size(), 1u);
}

TEST(Ensemble, Validation) {
  EXPECT_EQ(code_of([] { MatrixEnsemble(1, {{Matrix{{-0.1}}, 1.0}}); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { MatrixEnsemble(1, {{Matrix{{0.1}}, 0.6}, {Matrix{{0.2}}, 0.3}}); }),
            ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { MatrixEnsemble(2, {{Matrix{{0.1}}, 1.0}}); }), ErrorCode::DimensionMismatch);
  // Within the 1e-12 tolerance.
  EXPECT_NO_THROW(MatrixEnsemble(1, {{Matrix{{0.1}}, 0.5 + 4e-13}, {Matrix{{0.2}}, 0.5}}));
}

TEST(Absorb, ScalarTwice) {
  auto st = env::LogProductState::start(1);
  st = env::absorb(st, Matrix{{0.5}});
  st = env::absorb(st, Matrix{{0.5}});
  EXPECT_NEAR(st.s(), 2.0 * std::log(2.0), 1e-15);
  EXPECT_EQ(st.length, 2u);
}

TEST(Absorb, MatchesExtendedPrecisionPower) {
  const Matrix a{{0.3, 0.1}, {0.2, 0.4}};
  auto st = env::LogProductState::start(2);
  long double p[2][2] = {{1, 0}, {0, 1}};
  for (std::size_t n = 1; n <= 20; ++n) {
    st = env::absorb(st, a);
    long double q[2][2] = {};
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k) q[i][j] += static_cast<long double>(a(i, k)) * p[k][j];
    std::copy(&q[0][0], &q[0][0] + 4, &p[0][0]);
    const long double norm = std::max(p[0][0] + p[0][1], p[1][0] + p[1][1]);
    EXPECT_NEAR(st.s(), -std::log(static_cast<double>(norm)), static_cast<double>(n) * 1e-13);
    EXPECT_NEAR(st.normalized.norm_inf(), 1.0, 1e-12);
    EXPECT_EQ(st.length, n);
  }
  // -ln ||A^20|| / 20 approaches ln 2 from below: the prefactor of 0.5^n exceeds 1.
  EXPECT_LT(st.s() / 20.0, std::log(2.0));
  EXPECT_GT(st.s() / 20.0, std::log(2.0) - 0.05);
}

TEST(Absorb, ZeroMatrixAnnihilates) {
  const auto st = env::LogProductState::start(2);
  EXPECT_EQ(code_of([&] { env::absorb(st, Matrix(2, 0.0)); }), ErrorCode::ZeroProduct);
}

TEST(Lyapunov, ConstantScalarIsExact) {
  env::LyapunovOptions o;
  o.steps = 500;
  o.replicas = 4;
  const auto est = env::estimate_lyapunov(MatrixEnsemble::constant(Matrix{{0.5}}), o);
  EXPECT_NEAR(est.lambda_hat, std::log(2.0), 1e-13);
  EXPECT_NEAR(est.half_width, 0.0, 1e-13);
}

TEST(Lyapunov, TwoAtomScalarInsideInterval) {
  const MatrixEnsemble ens(1, {{Matrix{{0.25}}, 0.5}, {Matrix{{0.5}}, 0.5}});
  const double exact = 1.5 * std::log(2.0);
  EXPECT_NEAR(env::scalar_lyapunov(ens), exact, 1e-15);
  env::LyapunovOptions o;
  o.steps = 5000;
  o.replicas = 64;
  o.seed = 9;
  const auto est = env::estimate_lyapunov(ens, o);
  EXPECT_LE(std::abs(est.lambda_hat - exact), est.half_width);
  EXPECT_GT(est.half_width, 0.0);
}

TEST(Lyapunov, ConstantTwoByTwoMatchesEigenvalue) {
  const Matrix a{{0.3, 0.1}, {0.2, 0.4}};
  const double rho = (0.7 + std::sqrt(0.49 - 0.40)) / 2.0;
  for (std::size_t n : {200u, 2000u}) {
    env::LyapunovOptions o;
    o.steps = n;
    o.replicas = 2;
    EXPECT_LT(std::abs(env::estimate_lyapunov(MatrixEnsemble::constant(a), o).lambda_hat + std::log(rho)), 1e-9);
  }
}

TEST(Lyapunov, PlainEstimatorHasOneOverNBias) {
  // Without burn-in the estimator is S_n / n = ln 2 - ln(4/3) / n + O(2^-n).
  env::LyapunovOptions o;
  o.steps = 200;
  o.replicas = 2;
  o.burn_in_fraction = 0.0;
  const auto est = env::estimate_lyapunov(MatrixEnsemble::constant(Matrix{{0.3, 0.1}, {0.2, 0.4}}), o);
  EXPECT_NEAR(est.lambda_hat, std::log(2.0) - std::log(4.0 / 3.0) / 200.0, 1e-12);
}

TEST(Lyapunov, HalfWidthShrinksWithReplicas) {
  const MatrixEnsemble ens(1, {{Matrix{{0.25}}, 0.5}, {Matrix{{0.5}}, 0.5}});
  env::LyapunovOptions small, large;
  small.steps = large.steps = 1000;
  small.replicas = 16;
  large.replicas = 1024;
  EXPECT_GT(env::estimate_lyapunov(ens, small).half_width, env::estimate_lyapunov(ens, large).half_width);
}

TEST(Lyapunov, WorkerCountDoesNotChangeResult) {
  const MatrixEnsemble ens(2, {{Matrix{{0.5, 0.4}, {0.3, 0.5}}, 0.5}, {Matrix{{0.6, 0.2}, {0.4, 0.4}}, 0.5}});
  env::LyapunovOptions o;
  o.steps = 3000;
  o.replicas = 10;
  o.workers = 1;
  const auto a = env::estimate_lyapunov(ens, o);
  o.workers = 3;
  const auto b = env::estimate_lyapunov(ens, o);
  EXPECT_EQ(a.per_replica, b.per_replica);
  EXPECT_EQ(a.lambda_hat, b.lambda_hat);
}

TEST(Lyapunov, DegenerateEnsemble) {
  const MatrixEnsemble ens(2, {{Matrix{{0.5, 0.0}, {0.5, 0.0}}, 1.0}});
  EXPECT_EQ(code_of([&] { env::estimate_lyapunov(ens, {}); }), ErrorCode::DegenerateEnsemble);
}

TEST(Spectral, Examples) {
  EXPECT_NEAR(env::spectral_radius(Matrix{{0.5}}).rho, 0.5, 1e-15);
  const Matrix a{{0.3, 0.1}, {0.2, 0.4}};
  const auto pr = env::spectral_radius(a);
  EXPECT_NEAR(pr.rho, (0.7 + std::sqrt(0.09)) / 2.0, 1e-12);
  // H = lim rho^-n A^n, checked against a direct power.
  Matrix p = Matrix::identity(2);
  for (int n = 0; n < 200; ++n) p = p * a.scaled(1.0 / pr.rho);
  EXPECT_LT(max_abs_diff(p, pr.limit), 1e-9);
  EXPECT_EQ(code_of([] { env::spectral_radius(Matrix{{0.0, 0.5}, {0.5, 0.0}}); }), ErrorCode::NotPrimitive);
}

TEST(Primitive, Patterns) {
  EXPECT_FALSE(env::is_primitive(Matrix{{0, 1}, {1, 0}}));
  EXPECT_TRUE(env::is_primitive(Matrix{{0, 1}, {1, 1}}));
  EXPECT_TRUE(env::is_primitive(Matrix{{1, 1}, {1, 1}}));
  // Wielandt's extremal 3 x 3 pattern needs exactly (d-1)^2 + 1 = 5 steps.
  EXPECT_TRUE(env::is_primitive(Matrix{{0, 1, 0}, {0, 0, 1}, {1, 1, 0}}));
  EXPECT_FALSE(env::is_primitive(Matrix{{1, 0}, {0, 1}}));
}

TEST(CheckPr, Examples) {
  const auto pos = MatrixEnsemble::constant(Matrix{{0.2, 0.5}, {0.3, 0.4}});
  ASSERT_TRUE(env::check_pr(pos, 1).has_value());
  EXPECT_EQ(*env::check_pr(pos, 1), 0.2);

  const MatrixEnsemble mixed(2, {{Matrix{{0, 1}, {1, 0}}, 0.5}, {Matrix{{1, 1}, {1, 1}}, 0.5}});
  EXPECT_FALSE(env::check_pr(mixed, 2).has_value());

  const MatrixEnsemble wide(1, {{Matrix{{0.1}}, 0.25}, {Matrix{{0.2}}, 0.25}, {Matrix{{0.3}}, 0.25},
                                {Matrix{{0.4}}, 0.25}});
  EXPECT_EQ(code_of([&] { env::check_pr(wide, 11); }), ErrorCode::SupportTooLarge);
  EXPECT_NO_THROW(env::check_pr(wide, 9));
}

TEST(FindPr, SmallestK) {
  const auto ens = MatrixEnsemble::constant(Matrix{{0, 1}, {1, 1}});
  const auto w = env::find_pr(ens, 5);
  ASSERT_TRUE(w.has_value());
  EXPECT_EQ(w->k, 2u);
  EXPECT_EQ(w->kappa, 1.0);
}

TEST(Variation, Examples) {
  const auto s = env::variation_stats(Matrix{{1, 2}, {3, 4}});
  EXPECT_EQ(s.mu, 3.0);
  EXPECT_EQ(s.delta, 2.0);
  ASSERT_TRUE(s.big_delta.has_value());
  EXPECT_EQ(*s.big_delta, 3.0);

  const auto ones = env::variation_stats(Matrix(3, 1.0));
  EXPECT_EQ(ones.mu, 1.0);
  EXPECT_EQ(ones.delta, 3.0);
  EXPECT_EQ(*ones.big_delta, 1.0);

  EXPECT_EQ(code_of([] { env::big_delta(Matrix{{1, 0}, {0, 1}}); }), ErrorCode::NonPositive);
  EXPECT_FALSE(env::variation_stats(Matrix{{1, 0}, {0, 1}}).big_delta.has_value());
  EXPECT_EQ(code_of([] { env::variation_stats(Matrix(2, 0.0)); }), ErrorCode::ZeroMatrix);
  EXPECT_TRUE(std::isinf(env::variation_stats(Matrix{{1, 0}, {1, 0}}).delta));
}

TEST(Variation, InequalitiesOnRandomPairs) {
  Stream rng(17);
  for (int k = 0; k < 2000; ++k) {
    const std::size_t d = 2 + k % 3;
    const Matrix a = random_positive(d, rng), b = random_positive(d, rng);
    const Matrix ab = a * b;
    const double tol = 1.0 + 1e-10;
    const auto sa = env::variation_stats(a), sb = env::variation_stats(b), sab = env::variation_stats(ab);
    EXPECT_LE(*sab.big_delta, std::max(*sa.big_delta, *sb.big_delta) * tol);
    EXPECT_LE(*sab.big_delta, *sa.big_delta * sb.delta * tol);
    EXPECT_LE(sab.delta, sa.delta * sb.delta * tol);
    EXPECT_LE(sa.delta, static_cast<double>(d) * *sa.big_delta * tol);
    EXPECT_GE(sa.delta, 1.0);
    EXPECT_GE(*sa.big_delta, 1.0);
  }
}

TEST(Concentration, FrequenciesNonincreasing) {
  const MatrixEnsemble ens(2, {{Matrix{{0.5, 0.4}, {0.3, 0.5}}, 0.5}, {Matrix{{0.6, 0.2}, {0.4, 0.4}}, 0.5}});
  const auto prof = env::concentration_profile(ens, 300, 500, 4, {1.0, 2.0, 3.0});
  ASSERT_EQ(prof.frequencies.size(), 3u);
  EXPECT_GE(prof.frequencies[0], prof.frequencies[1]);
  EXPECT_GE(prof.frequencies[1], prof.frequencies[2]);
  EXPECT_NEAR(prof.thresholds[1], 2.0 * prof.sigma_hat, 1e-15);
}
