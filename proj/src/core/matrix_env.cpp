#include "core/matrix_env.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "core/error.hpp"
#include "core/parallel.hpp"

namespace arrec::env {

namespace {

constexpr double kProbabilityTolerance = 1e-12;

bool has_zero_column(const Matrix& a) {
  for (std::size_t j = 0; j < a.dim(); ++j) {
    bool zero = true;
    for (std::size_t i = 0; i < a.dim() && zero; ++i) zero = a(i, j) == 0.0;
    if (zero) return true;
  }
  return false;
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_sd(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

MatrixEnsemble::MatrixEnsemble(std::size_t dim, std::vector<Atom> atoms)
    : dim_(dim), atoms_(std::move(atoms)) {
  if (dim_ == 0) throw Error(ErrorCode::InvalidArgument, "ensemble dimension must be positive");
  if (atoms_.empty()) throw Error(ErrorCode::InvalidArgument, "ensemble needs at least one atom");
  double total = 0.0;
  for (std::size_t k = 0; k < atoms_.size(); ++k) {
    const Atom& atom = atoms_[k];
    if (atom.matrix.dim() != dim_) {
      throw Error(ErrorCode::DimensionMismatch,
                  "atom " + std::to_string(k) + " is not " + std::to_string(dim_) + "x" +
                      std::to_string(dim_));
    }
    if (!atom.matrix.is_nonnegative()) {
      throw Error(ErrorCode::InvalidArgument, "atom " + std::to_string(k) + " has a negative entry");
    }
    if (!(atom.probability >= 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "atom " + std::to_string(k) + " has negative mass");
    }
    total += atom.probability;
    cumulative_.push_back(total);
  }
  if (std::abs(total - 1.0) > kProbabilityTolerance) {
    throw Error(ErrorCode::InvalidArgument, "atom probabilities sum to " + std::to_string(total));
  }
}

MatrixEnsemble MatrixEnsemble::constant(Matrix m) {
  const std::size_t d = m.dim();
  return MatrixEnsemble(d, {Atom{std::move(m), 1.0}});
}

std::vector<Matrix> MatrixEnsemble::support() const {
  std::vector<Matrix> out;
  for (const Atom& atom : atoms_) {
    if (atom.probability > 0.0) out.push_back(atom.matrix);
  }
  return out;
}

bool MatrixEnsemble::is_constant() const { return support().size() == 1; }

std::size_t MatrixEnsemble::sample_index(Stream& rng) const {
  const double u = rng.uniform() * cumulative_.back();
  // Strict comparison means a zero-mass atom (equal consecutive cumulative
  // weights) can never be selected.
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  std::size_t idx = static_cast<std::size_t>(it - cumulative_.begin());
  if (idx >= atoms_.size()) {
    idx = atoms_.size() - 1;
    while (atoms_[idx].probability == 0.0 && idx > 0) --idx;
  }
  return idx;
}

double MatrixEnsemble::norm_bound() const {
  double best = 0.0;
  for (const Matrix& m : support()) best = std::max(best, m.norm_inf());
  return best;
}

LogProductState LogProductState::start(std::size_t dim) {
  return LogProductState{Matrix::identity(dim), 0.0, 0};
}

LogProductState absorb(const LogProductState& state, const Matrix& a) {
  if (!a.is_nonnegative()) throw Error(ErrorCode::InvalidArgument, "absorb needs a nonnegative matrix");
  Matrix product = a * state.normalized;
  const double norm = product.norm_inf();
  if (norm == 0.0) {
    throw Error(ErrorCode::ZeroProduct,
                "product vanished after " + std::to_string(state.length + 1) + " factors");
  }
  return LogProductState{product.scaled(1.0 / norm), state.log_norm + std::log(norm),
                         state.length + 1};
}

LyapunovEstimate estimate_lyapunov(const MatrixEnsemble& ensemble, const LyapunovOptions& options) {
  if (options.steps == 0) throw Error(ErrorCode::InvalidArgument, "lyapunov steps must be positive");
  if (options.replicas < 2) throw Error(ErrorCode::InvalidArgument, "lyapunov needs at least 2 replicas");
  if (!(options.burn_in_fraction >= 0.0 && options.burn_in_fraction < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "burn_in_fraction must lie in [0, 1)");
  }
  for (const Matrix& m : ensemble.support()) {
    if (has_zero_column(m)) {
      throw Error(ErrorCode::DegenerateEnsemble,
                  "an atom has a zero column, so no product of atoms is ever positive");
    }
  }

  const std::size_t n = options.steps;
  const auto burn_in = std::min<std::size_t>(
      n - 1, static_cast<std::size_t>(std::floor(options.burn_in_fraction * static_cast<double>(n))));

  LyapunovEstimate est;
  est.trajectory_length = n;
  est.replicas = options.replicas;
  est.burn_in = burn_in;
  est.per_replica.assign(options.replicas, 0.0);

  const Stream root(options.seed);
  parallel_for(options.replicas, options.workers, [&](std::size_t r) {
    Stream rng = root.child(r);
    LogProductState state = LogProductState::start(ensemble.dim());
    double s_burn = 0.0;
    for (std::size_t t = 1; t <= n; ++t) {
      state = absorb(state, ensemble.sample(rng));
      if (t == burn_in) s_burn = state.s();
    }
    est.per_replica[r] = (state.s() - s_burn) / static_cast<double>(n - burn_in);
  });

  est.lambda_hat = mean_of(est.per_replica);
  est.half_width = kCiMultiplier * sample_sd(est.per_replica, est.lambda_hat) /
                   std::sqrt(static_cast<double>(options.replicas));
  return est;
}

double scalar_lyapunov(const MatrixEnsemble& ensemble) {
  if (ensemble.dim() != 1) throw Error(ErrorCode::DimensionMismatch, "scalar_lyapunov needs d = 1");
  double acc = 0.0;
  for (const Atom& atom : ensemble.atoms()) {
    if (atom.probability == 0.0) continue;
    if (atom.matrix(0, 0) == 0.0) return std::numeric_limits<double>::infinity();
    acc -= atom.probability * std::log(atom.matrix(0, 0));
  }
  return acc;
}

bool is_primitive(const Matrix& a) {
  const std::size_t d = a.dim();
  if (d == 0) return false;
  std::vector<char> base(d * d), power(d * d), next(d * d);
  for (std::size_t k = 0; k < d * d; ++k) base[k] = a.data()[k] > 0.0;
  power = base;
  const std::size_t wielandt = (d - 1) * (d - 1) + 1;
  for (std::size_t step = 1; step <= wielandt; ++step) {
    if (std::all_of(power.begin(), power.end(), [](char c) { return c != 0; })) return true;
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        char v = 0;
        for (std::size_t k = 0; k < d && !v; ++k) v = power[i * d + k] && base[k * d + j];
        next[i * d + j] = v;
      }
    }
    std::swap(power, next);
  }
  return false;
}

PerronResult spectral_radius(const Matrix& a) {
  if (!a.is_nonnegative()) throw Error(ErrorCode::InvalidArgument, "spectral_radius needs a nonnegative matrix");
  if (!is_primitive(a)) throw Error(ErrorCode::NotPrimitive, "matrix is not primitive");

  const std::size_t d = a.dim();
  constexpr std::size_t kMaxIterations = 1'000'000;
  // Collatz-Wielandt: min_i and max_i of (Ax)_i / x_i bracket rho for x > 0.
  Vector x(d, 1.0);
  double lo = 0.0, hi = 0.0;
  std::size_t it = 0;
  for (; it < kMaxIterations; ++it) {
    Vector y = multiply(a, x);
    lo = std::numeric_limits<double>::infinity();
    hi = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      lo = std::min(lo, y[i] / x[i]);
      hi = std::max(hi, y[i] / x[i]);
    }
    const double scale = norm_inf(y);
    for (std::size_t i = 0; i < d; ++i) x[i] = y[i] / scale;
    if (hi - lo <= 16.0 * std::numeric_limits<double>::epsilon() * hi) break;
  }
  const double rq = 0.5 * (lo + hi);

  PerronResult out;
  out.rho = rq;
  out.iterations = it + 1;

  // rho^{-n} A^n converges to a positive rank-one matrix for primitive A.
  const Matrix step = a.scaled(1.0 / rq);
  Matrix power = Matrix::identity(d);
  for (std::size_t k = 0; k < 100000; ++k) {
    Matrix next = step * power;
    const double diff = max_abs_diff(next, power);
    power = std::move(next);
    if (diff < 1e-13 * std::max(1.0, power.max_entry())) break;
  }
  out.limit = std::move(power);
  return out;
}

namespace {

std::size_t checked_power(std::size_t base, std::size_t k, std::size_t budget) {
  std::size_t count = 1;
  for (std::size_t i = 0; i < k; ++i) {
    if (base != 0 && count > budget / base) return budget + 1;
    count *= base;
  }
  return count;
}

void enumerate_products(const std::vector<Matrix>& support, const Matrix& prefix, std::size_t depth,
                        double& kappa) {
  if (kappa == 0.0) return;
  if (depth == 0) {
    kappa = std::min(kappa, prefix.min_entry());
    return;
  }
  for (const Matrix& m : support) enumerate_products(support, prefix * m, depth - 1, kappa);
}

}  // namespace

std::optional<double> check_pr(const MatrixEnsemble& ensemble, std::size_t k,
                               std::size_t enumeration_budget) {
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "PR product length must be positive");
  const std::vector<Matrix> support = ensemble.support();
  const std::size_t count = checked_power(support.size(), k, enumeration_budget);
  if (count > enumeration_budget) {
    throw Error(ErrorCode::SupportTooLarge,
                std::to_string(support.size()) + "^" + std::to_string(k) +
                    " products exceed the enumeration budget of " + std::to_string(enumeration_budget));
  }
  double kappa = std::numeric_limits<double>::infinity();
  enumerate_products(support, Matrix::identity(ensemble.dim()), k, kappa);
  if (!(kappa > 0.0)) return std::nullopt;
  return kappa;
}

std::optional<PrWitness> find_pr(const MatrixEnsemble& ensemble, std::size_t k_max,
                                 std::size_t enumeration_budget) {
  const std::size_t atoms = ensemble.support().size();
  for (std::size_t k = 1; k <= k_max; ++k) {
    if (checked_power(atoms, k, enumeration_budget) > enumeration_budget) break;
    if (auto kappa = check_pr(ensemble, k, enumeration_budget)) return PrWitness{k, *kappa};
  }
  return std::nullopt;
}

VariationStats variation_stats(const Matrix& a) {
  if (a.is_zero()) throw Error(ErrorCode::ZeroMatrix, "variation of the zero matrix is undefined");
  if (!a.is_nonnegative()) throw Error(ErrorCode::InvalidArgument, "variation_stats needs a nonnegative matrix");
  const std::size_t d = a.dim();
  double mu = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < d; ++j) {
    double col_max = 0.0;
    for (std::size_t i = 0; i < d; ++i) col_max = std::max(col_max, a(i, j));
    mu = std::min(mu, col_max);
  }
  VariationStats out;
  out.mu = mu;
  out.delta = mu > 0.0 ? a.norm_1() / mu : std::numeric_limits<double>::infinity();
  if (a.is_positive()) out.big_delta = big_delta(a);
  return out;
}

double big_delta(const Matrix& a) {
  if (!a.is_positive()) throw Error(ErrorCode::NonPositive, "Delta needs a strictly positive matrix");
  const std::size_t d = a.dim();
  double best = 1.0;
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      for (std::size_t k = 0; k < d; ++k) {
        best = std::max(best, a(i, j) / a(i, k));
        best = std::max(best, a(i, j) / a(k, j));
      }
    }
  }
  return best;
}

ConcentrationProfile concentration_profile(const MatrixEnsemble& ensemble, std::size_t n,
                                           std::size_t replicas, std::uint64_t seed,
                                           const std::vector<double>& sigma_multipliers) {
  if (n == 0 || replicas < 2) throw Error(ErrorCode::InvalidArgument, "concentration profile needs n > 0 and 2+ replicas");
  std::vector<double> s(replicas);
  const Stream root(seed);
  for (std::size_t r = 0; r < replicas; ++r) {
    Stream rng = root.child(r);
    LogProductState state = LogProductState::start(ensemble.dim());
    for (std::size_t t = 0; t < n; ++t) state = absorb(state, ensemble.sample(rng));
    s[r] = state.s();
  }
  ConcentrationProfile out;
  const double mean_s = mean_of(s);
  const double sqrt_n = std::sqrt(static_cast<double>(n));
  out.lambda_hat = mean_s / static_cast<double>(n);
  out.sigma_hat = sample_sd(s, mean_s) / sqrt_n;
  for (double k : sigma_multipliers) {
    const double t = k * out.sigma_hat;
    const auto hits = std::count_if(s.begin(), s.end(), [&](double v) {
      return std::abs(v - out.lambda_hat * static_cast<double>(n)) >= t * sqrt_n;
    });
    out.thresholds.push_back(t);
    out.frequencies.push_back(static_cast<double>(hits) / static_cast<double>(replicas));
  }
  return out;
}

}  // namespace arrec::env
