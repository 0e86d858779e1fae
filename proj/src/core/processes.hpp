#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "core/dist.hpp"
#include "core/matrix.hpp"
#include "core/matrix_env.hpp"
#include "core/rng.hpp"

namespace arrec::proc {

struct ArState {
  Vector x;     // X_n = A_n X_{n-1} + Y_n
  Vector m;     // M_n = max(A_n M_{n-1}, Y_n)
  Vector nvec;  // N_n = max over k <= n of A_n ... A_{k+1} Y_k
  std::size_t step = 0;
};

// Coupled (X, M, N) on one stream of (A_n, Y_n). N has no one-step recursion
// for d > 1, so the chain keeps every transported innovation A_n...A_{k+1}Y_k
// that is not dominated by another one; dominated terms can never become the
// maximum again because all later maps are the same monotone linear map.
//
// Values saturate at DBL_MAX instead of overflowing. Matrix-vector products
// use a fixed summation order, so rounding is monotone and N <= M <= X holds
// exactly in floating point.
class ArChain {
 public:
  /// Starts at X_0 = M_0 = N_0 = y0.
  explicit ArChain(const Vector& y0);

  const ArState& state() const noexcept { return state_; }
  std::size_t stored_terms() const noexcept { return terms_.size(); }

  /// Advances by one step. Throws DimensionMismatch or InvalidArgument, and
  /// InvariantViolation if the coupling order is ever broken.
  void step(const Matrix& a, const Vector& y);

 private:
  void push_term(Vector v);

  ArState state_;
  std::vector<Vector> terms_;
};

struct TrajectoryRecord {
  std::size_t dim = 0;
  std::vector<Vector> x;
  std::vector<Vector> m;
  std::vector<Vector> nvec;
  std::vector<long> env;      // atom index of A_n; -1 at n = 0
  std::vector<double> norm;   // ||X_n||
  std::size_t steps() const noexcept { return norm.empty() ? 0 : norm.size() - 1; }
};

/// Runs the coupled chain for n steps after X_0 = Y_0. A scalar innovation law
/// is lifted to the ensemble dimension.
TrajectoryRecord simulate_ar(const env::MatrixEnsemble& ensemble, const dist::InnovationLaw& law,
                             std::size_t n, Stream& rng);

/// d = 1 closed form sum_{m<=n} a_n ... a_{m+1} y_m from recorded multipliers.
double scalar_closed_form(const std::vector<double>& a, const std::vector<double>& y);

// ---------------------------------------------------------------------------
// Multitype branching with immigration.

enum class OffspringFamily { Poisson, Bernoulli, Geometric };

const char* to_string(OffspringFamily f) noexcept;

/// Conditional variance of one offspring count with mean `mean`.
double offspring_variance(OffspringFamily family, double mean);
/// Bound on ||V^j|| over the ensemble support (the covariance is diagonal
/// for these product-form families).
double offspring_gamma2(OffspringFamily family, const env::MatrixEnsemble& ensemble);

using Counts = std::vector<std::uint64_t>;

struct BranchingState {
  std::vector<Counts> cohorts;           // B_{m,n}, oldest first; extinct cohorts dropped
  std::vector<std::size_t> cohort_born;  // m for each stored cohort
  Counts z;                              // sum of the cohorts
  std::size_t step = 0;
  long env = -1;
};

inline constexpr std::uint64_t kDefaultPopulationCap = 100'000'000;

/// Z_0 = B_{0,0} = initial.
BranchingState branching_start(const Counts& initial);

/// One generation: every individual of type j reproduces with mean column j
/// of `a`; then `immigrants` arrive as a new cohort. Throws PopulationOverflow
/// once the total exceeds `cap`.
void branching_step(BranchingState& state, const Matrix& a, OffspringFamily family,
                    const Counts& immigrants, Stream& rng,
                    std::uint64_t cap = kDefaultPopulationCap);

Counts floor_counts(const Vector& y);
std::uint64_t total(const Counts& c);

// ---------------------------------------------------------------------------
// Random exchange process R_n = max(R_{n-1} - T_n, W_n).

struct ExchangeState {
  double r = 0.0;
  std::size_t step = 0;
};

ExchangeState exchange_step(const ExchangeState& state, double t, double w);

}  // namespace arrec::proc
