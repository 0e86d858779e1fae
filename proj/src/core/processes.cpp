#include "core/processes.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <random>
#include <string>

#include "core/error.hpp"

namespace arrec::proc {

namespace {

void saturate(Vector& v) {
  for (double& x : v) x = std::min(x, DBL_MAX);
}

bool dominated(const Vector& v, const Vector& w) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] > w[i]) return false;
  }
  return true;
}

bool is_zero(const Vector& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

void check_nonnegative(const Vector& y) {
  for (double v : y) {
    if (!(v >= 0.0)) throw Error(ErrorCode::InvalidArgument, "innovation must be nonnegative");
  }
}

std::uint64_t add_checked(std::uint64_t a, std::uint64_t b, std::uint64_t cap) {
  if (b > cap || a > cap - b) {
    throw Error(ErrorCode::PopulationOverflow,
                "population exceeded the cap of " + std::to_string(cap) + " individuals");
  }
  return a + b;
}

}  // namespace

ArChain::ArChain(const Vector& y0) {
  check_nonnegative(y0);
  state_.x = y0;
  state_.m = y0;
  state_.nvec = y0;
  saturate(state_.x);
  saturate(state_.m);
  saturate(state_.nvec);
  if (!is_zero(state_.nvec)) terms_.push_back(state_.nvec);
}

void ArChain::push_term(Vector v) {
  if (is_zero(v)) return;
  for (const Vector& w : terms_) {
    if (dominated(v, w)) return;
  }
  std::erase_if(terms_, [&](const Vector& w) { return dominated(w, v); });
  terms_.push_back(std::move(v));
}

void ArChain::step(const Matrix& a, const Vector& y) {
  const std::size_t d = state_.x.size();
  if (a.dim() != d || y.size() != d) {
    throw Error(ErrorCode::DimensionMismatch, "ar step with mismatched dimensions");
  }
  if (!a.is_nonnegative()) throw Error(ErrorCode::InvalidArgument, "coefficient matrix must be nonnegative");
  check_nonnegative(y);

  Vector x = multiply(a, state_.x);
  for (std::size_t i = 0; i < d; ++i) x[i] += y[i];
  saturate(x);

  Vector m = multiply(a, state_.m);
  saturate(m);
  for (std::size_t i = 0; i < d; ++i) m[i] = std::max(m[i], y[i]);

  Vector nvec(d, 0.0);
  if (d == 1) {
    // One-dimensional fast path: at most one stored term.
    nvec[0] = std::max(std::min(a(0, 0) * state_.nvec[0], DBL_MAX), y[0]);
    terms_.clear();
    if (nvec[0] > 0.0) terms_.push_back(nvec);
  } else {
    std::vector<Vector> moved;
    moved.reserve(terms_.size() + 1);
    for (const Vector& t : terms_) {
      Vector v = multiply(a, t);
      saturate(v);
      moved.push_back(std::move(v));
    }
    terms_.clear();
    for (Vector& v : moved) push_term(std::move(v));
    push_term(y);
    for (const Vector& t : terms_) {
      for (std::size_t i = 0; i < d; ++i) nvec[i] = std::max(nvec[i], t[i]);
    }
  }

  for (std::size_t i = 0; i < d; ++i) {
    if (!(nvec[i] <= m[i] && m[i] <= x[i])) {
      throw Error(ErrorCode::InvariantViolation,
                  "coupling order N <= M <= X broken at step " + std::to_string(state_.step + 1) +
                      ", component " + std::to_string(i));
    }
  }
  state_.x = std::move(x);
  state_.m = std::move(m);
  state_.nvec = std::move(nvec);
  ++state_.step;
}

TrajectoryRecord simulate_ar(const env::MatrixEnsemble& ensemble, const dist::InnovationLaw& law,
                             std::size_t n, Stream& rng) {
  const dist::InnovationLaw lifted = law.lifted(ensemble.dim());
  TrajectoryRecord rec;
  rec.dim = ensemble.dim();
  rec.x.reserve(n + 1);
  rec.m.reserve(n + 1);
  rec.nvec.reserve(n + 1);
  rec.env.reserve(n + 1);
  rec.norm.reserve(n + 1);

  ArChain chain(lifted.sample_vector(rng));
  auto record = [&](long env_index) {
    const ArState& s = chain.state();
    rec.x.push_back(s.x);
    rec.m.push_back(s.m);
    rec.nvec.push_back(s.nvec);
    rec.env.push_back(env_index);
    rec.norm.push_back(norm_inf(s.x));
  };
  record(-1);
  for (std::size_t t = 1; t <= n; ++t) {
    const std::size_t idx = ensemble.sample_index(rng);
    const Vector y = lifted.sample_vector(rng);
    chain.step(ensemble.atoms()[idx].matrix, y);
    record(static_cast<long>(idx));
  }
  return rec;
}

double scalar_closed_form(const std::vector<double>& a, const std::vector<double>& y) {
  // a[k] multiplies into step k (a[0] unused), y[k] is Y_k.
  if (a.size() != y.size() || y.empty()) {
    throw Error(ErrorCode::DimensionMismatch, "closed form needs matching multiplier and innovation lists");
  }
  const std::size_t n = y.size() - 1;
  double sum = 0.0;
  for (std::size_t m = 0; m <= n; ++m) {
    double prod = y[m];
    for (std::size_t k = m + 1; k <= n; ++k) prod *= a[k];
    sum += prod;
  }
  return sum;
}

const char* to_string(OffspringFamily f) noexcept {
  switch (f) {
    case OffspringFamily::Poisson: return "poisson";
    case OffspringFamily::Bernoulli: return "bernoulli";
    case OffspringFamily::Geometric: return "geometric";
  }
  return "unknown";
}

double offspring_variance(OffspringFamily family, double mean) {
  switch (family) {
    case OffspringFamily::Poisson: return mean;
    case OffspringFamily::Bernoulli: return mean * (1.0 - mean);
    case OffspringFamily::Geometric: return mean * (1.0 + mean);
  }
  return 0.0;
}

double offspring_gamma2(OffspringFamily family, const env::MatrixEnsemble& ensemble) {
  double best = 0.0;
  for (const Matrix& a : ensemble.support()) {
    for (std::size_t i = 0; i < a.dim(); ++i) {
      for (std::size_t j = 0; j < a.dim(); ++j) best = std::max(best, offspring_variance(family, a(i, j)));
    }
  }
  return best;
}

BranchingState branching_start(const Counts& initial) {
  BranchingState s;
  s.z = initial;
  if (total(initial) > 0) {
    s.cohorts.push_back(initial);
    s.cohort_born.push_back(0);
  }
  return s;
}

void branching_step(BranchingState& state, const Matrix& a, OffspringFamily family,
                    const Counts& immigrants, Stream& rng, std::uint64_t cap) {
  const std::size_t d = a.dim();
  if (state.z.size() != d || immigrants.size() != d) {
    throw Error(ErrorCode::DimensionMismatch, "branching step with mismatched dimensions");
  }
  if (!a.is_nonnegative()) throw Error(ErrorCode::InvalidArgument, "mean matrix must be nonnegative");
  if (family == OffspringFamily::Bernoulli && a.max_entry() > 1.0) {
    throw Error(ErrorCode::InvalidArgument, "Bernoulli offspring needs mean entries <= 1");
  }

  auto& engine = rng.engine();
  std::uint64_t population = 0;
  std::vector<Counts> next;
  std::vector<std::size_t> born;
  next.reserve(state.cohorts.size() + 1);
  for (std::size_t c = 0; c < state.cohorts.size(); ++c) {
    const Counts& parents = state.cohorts[c];
    Counts children(d, 0);
    for (std::size_t j = 0; j < d; ++j) {
      const std::uint64_t k = parents[j];
      if (k == 0) continue;
      for (std::size_t i = 0; i < d; ++i) {
        const double mean = a(i, j);
        if (mean == 0.0) continue;
        // Sum over the k parents of i.i.d. product-form offspring counts.
        std::uint64_t drawn = 0;
        switch (family) {
          case OffspringFamily::Poisson:
            drawn = std::poisson_distribution<std::uint64_t>(static_cast<double>(k) * mean)(engine);
            break;
          case OffspringFamily::Bernoulli:
            drawn = std::binomial_distribution<std::uint64_t>(k, mean)(engine);
            break;
          case OffspringFamily::Geometric:
            drawn = std::negative_binomial_distribution<std::uint64_t>(k, 1.0 / (1.0 + mean))(engine);
            break;
        }
        children[i] = add_checked(children[i], drawn, cap);
        population = add_checked(population, drawn, cap);
      }
    }
    if (total(children) > 0) {
      next.push_back(std::move(children));
      born.push_back(state.cohort_born[c]);
    }
  }
  ++state.step;
  const std::uint64_t arriving = total(immigrants);
  population = add_checked(population, arriving, cap);
  if (arriving > 0) {
    next.push_back(immigrants);
    born.push_back(state.step);
  }
  Counts z(d, 0);
  for (const Counts& c : next) {
    for (std::size_t i = 0; i < d; ++i) z[i] += c[i];
  }
  state.cohorts = std::move(next);
  state.cohort_born = std::move(born);
  state.z = std::move(z);
}

Counts floor_counts(const Vector& y) {
  Counts out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!(y[i] >= 0.0)) throw Error(ErrorCode::InvalidArgument, "immigration must be nonnegative");
    const double f = std::floor(y[i]);
    if (f >= 1.8e19) throw Error(ErrorCode::PopulationOverflow, "immigrant count does not fit in 64 bits");
    out[i] = static_cast<std::uint64_t>(f);
  }
  return out;
}

std::uint64_t total(const Counts& c) {
  std::uint64_t s = 0;
  for (std::uint64_t v : c) s += v;
  return s;
}

ExchangeState exchange_step(const ExchangeState& state, double t, double w) {
  return ExchangeState{std::max(state.r - t, w), state.step + 1};
}

}  // namespace arrec::proc
