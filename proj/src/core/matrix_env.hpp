#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "core/matrix.hpp"
#include "core/rng.hpp"

namespace arrec::env {

struct Atom {
  Matrix matrix;
  double probability = 0.0;
};

// The law of the i.i.d. coefficient matrices: a finite list of nonnegative
// d x d atoms with probabilities. A constant environment is one atom with
// probability 1.
class MatrixEnsemble {
 public:
  MatrixEnsemble(std::size_t dim, std::vector<Atom> atoms);

  static MatrixEnsemble constant(Matrix m);

  std::size_t dim() const noexcept { return dim_; }
  const std::vector<Atom>& atoms() const noexcept { return atoms_; }
  /// Atoms carrying positive mass.
  std::vector<Matrix> support() const;
  bool is_constant() const;

  /// Index of the atom drawn by inverse transform on the cumulative weights.
  std::size_t sample_index(Stream& rng) const;
  const Matrix& sample(Stream& rng) const { return atoms_[sample_index(rng)].matrix; }

  /// sup of ||A|| over the support (not rounded up).
  double norm_bound() const;

 private:
  std::size_t dim_;
  std::vector<Atom> atoms_;
  std::vector<double> cumulative_;
};

// Running product A_n ... A_1 kept as a normalized matrix plus a log scale, so
// 10^6-step products neither underflow nor overflow.
struct LogProductState {
  Matrix normalized;     // ||normalized||_inf == 1
  double log_norm = 0.0; // ln ||A_n ... A_1|| = -S_n
  std::size_t length = 0;

  static LogProductState start(std::size_t dim);
  double s() const noexcept { return -log_norm; }
};

/// Left-multiplies the product by `a` and renormalizes. Throws ZeroProduct if
/// the new product vanishes.
LogProductState absorb(const LogProductState& state, const Matrix& a);

struct LyapunovOptions {
  std::size_t steps = 10000;
  std::size_t replicas = 32;
  std::uint64_t seed = 1;
  /// Fraction of each trajectory discarded before measuring the growth rate.
  /// 0 gives the plain S_n / n estimator.
  double burn_in_fraction = 0.5;
  unsigned workers = 0;
};

struct LyapunovEstimate {
  double lambda_hat = 0.0;
  double half_width = 0.0;
  std::size_t trajectory_length = 0;
  std::size_t replicas = 0;
  std::size_t burn_in = 0;
  std::vector<double> per_replica;
};

/// 99% normal-approximation multiplier used for all replica confidence intervals.
inline constexpr double kCiMultiplier = 2.576;

LyapunovEstimate estimate_lyapunov(const MatrixEnsemble& ensemble, const LyapunovOptions& options);

/// -E[ln A] for a scalar ensemble (exact).
double scalar_lyapunov(const MatrixEnsemble& ensemble);

struct PerronResult {
  double rho = 0.0;
  Matrix limit;  // rho^{-n} A^n for large n
  std::size_t iterations = 0;
};

bool is_primitive(const Matrix& a);
PerronResult spectral_radius(const Matrix& a);

/// Minimum entry over all |support|^k ordered products of length k, or nullopt
/// if some product has a zero entry.
std::optional<double> check_pr(const MatrixEnsemble& ensemble, std::size_t k,
                               std::size_t enumeration_budget = 1'000'000);

struct PrWitness {
  std::size_t k = 0;
  double kappa = 0.0;
};

/// Smallest k <= k_max for which check_pr succeeds; stops early once the
/// enumeration budget would be exceeded.
std::optional<PrWitness> find_pr(const MatrixEnsemble& ensemble, std::size_t k_max,
                                 std::size_t enumeration_budget = 1'000'000);

struct VariationStats {
  double delta = 0.0;                 // ||A||_1 / mu(A), may be +inf
  std::optional<double> big_delta;    // max same-row / same-column ratio, positive A only
  double mu = 0.0;                    // min_j max_i A_ij
};

/// Throws ZeroMatrix for A == 0.
VariationStats variation_stats(const Matrix& a);
/// Throws NonPositive if A has a zero entry.
double big_delta(const Matrix& a);

struct ConcentrationProfile {
  double lambda_hat = 0.0;
  double sigma_hat = 0.0;  // sample sd of S_n / sqrt(n)
  std::vector<double> thresholds;   // t = multiplier * sigma_hat
  std::vector<double> frequencies;  // empirical P[|S_n - lambda_hat n| >= t sqrt(n)]
};

ConcentrationProfile concentration_profile(const MatrixEnsemble& ensemble, std::size_t n,
                                           std::size_t replicas, std::uint64_t seed,
                                           const std::vector<double>& sigma_multipliers);

}  // namespace arrec::env
