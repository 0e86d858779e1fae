#include "core/dist.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/special_functions/gamma.hpp>

#include "core/error.hpp"

namespace arrec::dist {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Above this every double is an integer, so flooring is the identity.
constexpr double kExactIntegerLimit = 9007199254740992.0;  // 2^53

double softplus(double u) { return u > 0.0 ? u + std::log1p(std::exp(-u)) : std::log1p(std::exp(u)); }

double saturate(double x) { return std::min(x, DBL_MAX); }

bool is_integer(double v) { return std::isfinite(v) && v == std::floor(v); }

void require(bool ok, const std::string& message) {
  if (!ok) throw Error(ErrorCode::InvalidArgument, message);
}

}  // namespace

const char* to_string(Kind kind) noexcept {
  switch (kind) {
    case Kind::LogPareto: return "log_pareto";
    case Kind::ParetoTail: return "pareto_tail";
    case Kind::Geometric: return "geometric";
    case Kind::Poisson: return "poisson";
    case Kind::DiscreteTable: return "discrete_table";
    case Kind::Deterministic: return "deterministic";
    case Kind::ScaledVector: return "scaled_vector";
    case Kind::FloorOf: return "floor";
  }
  return "unknown";
}

const char* to_string(Moment m) noexcept {
  switch (m) {
    case Moment::Finite: return "finite";
    case Moment::Infinite: return "infinite";
    case Moment::Unknown: return "unknown";
  }
  return "unknown";
}

const char* to_string(Regularity r) noexcept {
  switch (r) {
    case Regularity::Yes: return "yes";
    case Regularity::No: return "no";
    case Regularity::Unknown: return "unknown";
  }
  return "unknown";
}

InnovationLaw InnovationLaw::log_pareto(double beta, double p) {
  require(beta > 0.0 && std::isfinite(beta), "log_pareto needs beta > 0");
  require(p > 0.0 && std::isfinite(p), "log_pareto needs p > 0");
  return InnovationLaw(Kind::LogPareto, beta, p);
}

InnovationLaw InnovationLaw::pareto_tail(double a) {
  require(a > 0.0 && std::isfinite(a), "pareto_tail needs a > 0");
  return InnovationLaw(Kind::ParetoTail, a, 0.0);
}

InnovationLaw InnovationLaw::geometric(double q) {
  require(q > 0.0 && q < 1.0, "geometric needs q in (0, 1)");
  return InnovationLaw(Kind::Geometric, q, 0.0);
}

InnovationLaw InnovationLaw::poisson(double mean) {
  require(mean > 0.0 && mean <= 1e9, "poisson needs a mean in (0, 1e9]");
  return InnovationLaw(Kind::Poisson, mean, 0.0);
}

InnovationLaw InnovationLaw::discrete_table(std::vector<double> values, std::vector<double> probs) {
  require(!values.empty(), "discrete_table needs at least one value");
  require(values.size() == probs.size(), "discrete_table values and probs differ in length");
  require(values.size() <= kMaxTableAtoms, "discrete_table is capped at 100000 atoms");
  std::vector<std::size_t> order(values.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](auto l, auto r) { return values[l] < values[r]; });

  InnovationLaw law(Kind::DiscreteTable, 0.0, 0.0);
  double total = 0.0;
  for (std::size_t idx : order) {
    require(values[idx] >= 0.0 && std::isfinite(values[idx]), "discrete_table values must be finite and >= 0");
    require(probs[idx] >= 0.0, "discrete_table probabilities must be >= 0");
    if (!law.values_.empty() && law.values_.back() == values[idx]) {
      law.probs_.back() += probs[idx];
    } else {
      law.values_.push_back(values[idx]);
      law.probs_.push_back(probs[idx]);
    }
    total += probs[idx];
  }
  require(std::abs(total - 1.0) <= 1e-9, "discrete_table probabilities must sum to 1");
  double acc = 0.0;
  for (double p : law.probs_) {
    acc += p / total;
    law.cumulative_.push_back(acc);
  }
  law.cumulative_.back() = 1.0;
  return law;
}

InnovationLaw InnovationLaw::deterministic(double v) {
  require(v >= 0.0 && std::isfinite(v), "deterministic needs a finite value >= 0");
  return InnovationLaw(Kind::Deterministic, v, 0.0);
}

InnovationLaw InnovationLaw::scaled_vector(const InnovationLaw& component, std::size_t dim) {
  require(dim >= 1, "scaled_vector needs dim >= 1");
  require(component.dim() == 1, "scaled_vector needs a scalar component law");
  InnovationLaw law(Kind::ScaledVector, 0.0, 0.0);
  law.dim_ = dim;
  law.inner_ = std::make_shared<const InnovationLaw>(component);
  return law;
}

InnovationLaw InnovationLaw::floor_of(const InnovationLaw& inner) {
  require(inner.dim() == 1, "floor needs a scalar law");
  InnovationLaw law(Kind::FloorOf, 0.0, 0.0);
  law.inner_ = std::make_shared<const InnovationLaw>(inner);
  return law;
}

InnovationLaw InnovationLaw::lifted(std::size_t dim) const {
  if (dim == dim_) return *this;
  if (dim_ != 1) {
    throw Error(ErrorCode::DimensionMismatch,
                "innovation has " + std::to_string(dim_) + " components, ensemble has " + std::to_string(dim));
  }
  return scaled_vector(*this, dim);
}

double InnovationLaw::poisson_cdf(double k) const {
  if (k < 0.0) return 0.0;
  if (k > 1e15) return 1.0;
  return boost::math::gamma_q(std::floor(k) + 1.0, a_);
}

double InnovationLaw::cdf(double x) const {
  if (std::isnan(x)) throw Error(ErrorCode::InvalidArgument, "cdf at NaN");
  switch (kind_) {
    case Kind::LogPareto:
      if (x <= 0.0) return 0.0;
      return 1.0 - std::pow(1.0 + a_ * std::log1p(x), -b_);
    case Kind::ParetoTail:
      if (x <= a_) return 0.0;
      return 1.0 - a_ / x;
    case Kind::Geometric:
      if (x < 0.0) return 0.0;
      return -std::expm1((std::floor(x) + 1.0) * std::log1p(-a_));
    case Kind::Poisson:
      return poisson_cdf(x);
    case Kind::DiscreteTable: {
      const auto it = std::upper_bound(values_.begin(), values_.end(), x);
      if (it == values_.begin()) return 0.0;
      return cumulative_[static_cast<std::size_t>(it - values_.begin()) - 1];
    }
    case Kind::Deterministic:
      return x >= a_ ? 1.0 : 0.0;
    case Kind::ScaledVector: {
      const double c = inner_->cdf(x);
      return std::pow(c, static_cast<double>(dim_));
    }
    case Kind::FloorOf:
      if (x < 0.0) return 0.0;
      if (x >= kExactIntegerLimit) return inner_->cdf(x);
      return inner_->cdf_below(std::floor(x) + 1.0);
  }
  return 0.0;
}

double InnovationLaw::cdf_below(double x) const {
  switch (kind_) {
    case Kind::LogPareto:
    case Kind::ParetoTail:
      return cdf(x);
    case Kind::Geometric:
    case Kind::Poisson:
    case Kind::FloorOf:
      if (x <= 0.0) return 0.0;
      if (x >= kExactIntegerLimit) return cdf(x);
      return cdf(std::ceil(x) - 1.0);
    case Kind::DiscreteTable: {
      const auto it = std::lower_bound(values_.begin(), values_.end(), x);
      if (it == values_.begin()) return 0.0;
      return cumulative_[static_cast<std::size_t>(it - values_.begin()) - 1];
    }
    case Kind::Deterministic:
      return x > a_ ? 1.0 : 0.0;
    case Kind::ScaledVector:
      return std::pow(inner_->cdf_below(x), static_cast<double>(dim_));
  }
  return 0.0;
}

double InnovationLaw::tail_log(double u) const {
  if (std::isnan(u)) throw Error(ErrorCode::InvalidArgument, "tail_log at NaN");
  if (u == -kInf) return 1.0 - cdf(0.0);
  switch (kind_) {
    case Kind::LogPareto:
      return std::pow(1.0 + a_ * softplus(u), -b_);
    case Kind::ParetoTail:
      return std::exp(std::min(0.0, std::log(a_) - u));
    case Kind::Geometric: {
      const double x = std::exp(u);
      return std::exp((std::floor(x) + 1.0) * std::log1p(-a_));
    }
    case Kind::Poisson: {
      const double x = std::exp(u);
      if (x > 1e15) return 0.0;
      return boost::math::gamma_p(std::floor(x) + 1.0, a_);
    }
    case Kind::DiscreteTable:
    case Kind::Deterministic:
      return 1.0 - cdf(std::exp(u));
    case Kind::ScaledVector: {
      const double t = inner_->tail_log(u);
      return -std::expm1(static_cast<double>(dim_) * std::log1p(-t));
    }
    case Kind::FloorOf: {
      const double x = std::exp(u);
      const bool continuous_inner =
          inner_->kind() == Kind::LogPareto || inner_->kind() == Kind::ParetoTail;
      if (x >= kExactIntegerLimit) {
        return continuous_inner ? inner_->tail_log(u) : 1.0 - inner_->cdf_below(x);
      }
      const double k1 = std::floor(x) + 1.0;
      return continuous_inner ? inner_->tail_log(std::log(k1)) : 1.0 - inner_->cdf_below(k1);
    }
  }
  return 0.0;
}

double InnovationLaw::quantile(double prob) const {
  require(prob > 0.0 && prob < 1.0, "quantile needs a probability in (0, 1)");
  switch (kind_) {
    case Kind::LogPareto:
      return std::expm1((std::pow(1.0 - prob, -1.0 / b_) - 1.0) / a_);
    case Kind::ParetoTail:
      return a_ / (1.0 - prob);
    case Kind::Geometric: {
      double k = std::max(0.0, std::ceil(std::log1p(-prob) / std::log1p(-a_)) - 1.0);
      while (k > 0.0 && cdf(k - 1.0) >= prob) k -= 1.0;
      while (cdf(k) < prob) k += 1.0;
      return k;
    }
    case Kind::Poisson: {
      double lo = 0.0, hi = a_ + 50.0 * std::sqrt(a_) + 50.0;
      while (lo < hi) {
        const double mid = std::floor((lo + hi) / 2.0);
        if (cdf(mid) >= prob) hi = mid; else lo = mid + 1.0;
      }
      return lo;
    }
    case Kind::DiscreteTable: {
      const auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), prob);
      return values_[std::min(values_.size() - 1, static_cast<std::size_t>(it - cumulative_.begin()))];
    }
    case Kind::Deterministic:
      return a_;
    case Kind::ScaledVector:
      return inner_->quantile(std::pow(prob, 1.0 / static_cast<double>(dim_)));
    case Kind::FloorOf:
      return std::floor(inner_->quantile(prob));
  }
  return 0.0;
}

double InnovationLaw::mean() const {
  switch (kind_) {
    case Kind::LogPareto:
    case Kind::ParetoTail:
      return kInf;
    case Kind::Geometric:
      return (1.0 - a_) / a_;
    case Kind::Poisson:
      return a_;
    case Kind::DiscreteTable: {
      double m = 0.0;
      for (std::size_t i = 0; i < values_.size(); ++i) m += values_[i] * probs_[i];
      return m;
    }
    case Kind::Deterministic:
      return a_;
    case Kind::ScaledVector:
    case Kind::FloorOf: {
      if (!std::isfinite(inner_->mean())) return kInf;
      // E[X] = sum_{k >= 0} P[X > k] for the (integer or max) norm.
      double m = 0.0;
      for (double k = 0.0; k < 1e7; k += 1.0) {
        const double t = tail(k);
        m += t;
        if (t < 1e-17) return m;
      }
      return m;
    }
  }
  return kInf;
}

double InnovationLaw::component_sample(Stream& rng) const {
  switch (kind_) {
    case Kind::LogPareto: {
      const double u = rng.uniform_pos();
      const double t = (std::exp(-std::log(u) / b_) - 1.0) / a_;
      return saturate(std::expm1(t));
    }
    case Kind::ParetoTail:
      return saturate(a_ / rng.uniform_pos());
    case Kind::Geometric:
      return std::floor(std::log(rng.uniform_pos()) / std::log1p(-a_));
    case Kind::Poisson: {
      const double u = rng.uniform();
      if (a_ <= 500.0) {
        double p = std::exp(-a_);
        double f = p;
        double k = 0.0;
        const double guard = a_ + 100.0 * std::sqrt(a_) + 100.0;
        while (u >= f && k < guard) {
          k += 1.0;
          p *= a_ / k;
          f += p;
        }
        return k;
      }
      double lo = 0.0, hi = a_ + 50.0 * std::sqrt(a_) + 50.0;
      while (lo < hi) {
        const double mid = std::floor((lo + hi) / 2.0);
        if (poisson_cdf(mid) > u) hi = mid; else lo = mid + 1.0;
      }
      return lo;
    }
    case Kind::DiscreteTable: {
      const double u = rng.uniform();
      const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
      return values_[std::min(values_.size() - 1, static_cast<std::size_t>(it - cumulative_.begin()))];
    }
    case Kind::Deterministic:
      return a_;
    case Kind::ScaledVector:
      return inner_->sample(rng);
    case Kind::FloorOf:
      return std::floor(inner_->sample(rng));
  }
  return 0.0;
}

double InnovationLaw::sample(Stream& rng) const {
  if (kind_ != Kind::ScaledVector) return component_sample(rng);
  double best = 0.0;
  for (std::size_t i = 0; i < dim_; ++i) best = std::max(best, inner_->sample(rng));
  return best;
}

double InnovationLaw::sample_log(Stream& rng) const {
  switch (kind_) {
    case Kind::LogPareto: {
      const double u = rng.uniform_pos();
      const double t = (std::exp(-std::log(u) / b_) - 1.0) / a_;
      if (t > 700.0) return t + std::log1p(-std::exp(-t));
      return std::log(std::expm1(t));
    }
    case Kind::ParetoTail:
      return std::log(a_) - std::log(rng.uniform_pos());
    case Kind::ScaledVector: {
      double best = -kInf;
      for (std::size_t i = 0; i < dim_; ++i) best = std::max(best, inner_->sample_log(rng));
      return best;
    }
    case Kind::FloorOf: {
      const double l = inner_->sample_log(rng);
      if (l > 36.0) return l;
      return std::log(std::floor(std::exp(l)));
    }
    default:
      return std::log(component_sample(rng));
  }
}

Vector InnovationLaw::sample_vector(Stream& rng) const {
  if (kind_ != Kind::ScaledVector) return Vector{component_sample(rng)};
  Vector v(dim_);
  for (double& x : v) x = inner_->sample(rng);
  return v;
}

bool InnovationLaw::integer_valued() const {
  switch (kind_) {
    case Kind::Geometric:
    case Kind::Poisson:
    case Kind::FloorOf:
      return true;
    case Kind::DiscreteTable:
      return std::all_of(values_.begin(), values_.end(), is_integer);
    case Kind::Deterministic:
      return is_integer(a_);
    case Kind::ScaledVector:
      return inner_->integer_valued();
    default:
      return false;
  }
}

bool InnovationLaw::bounded_support() const {
  switch (kind_) {
    case Kind::DiscreteTable:
    case Kind::Deterministic:
      return true;
    case Kind::ScaledVector:
    case Kind::FloorOf:
      return inner_->bounded_support();
    default:
      return false;
  }
}

TailClass InnovationLaw::tail_class() const {
  switch (kind_) {
    case Kind::LogPareto: {
      TailClass tc{Moment::Finite, Regularity::Yes, 0.0, 0.0};
      if (b_ == 1.0) {
        tc = {Moment::Infinite, Regularity::Yes, 1.0 / a_, 1.0 / a_};
      } else if (b_ < 1.0) {
        tc = {Moment::Infinite, Regularity::Yes, kInf, kInf};
      }
      return tc;
    }
    case Kind::ParetoTail:
    case Kind::Geometric:
    case Kind::Poisson:
    case Kind::Deterministic:
      return {Moment::Finite, Regularity::Yes, 0.0, 0.0};
    case Kind::DiscreteTable: {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      return {Moment::Unknown, Regularity::Unknown, nan, nan};
    }
    case Kind::ScaledVector: {
      TailClass tc = inner_->tail_class();
      tc.limsup *= static_cast<double>(dim_);
      tc.liminf *= static_cast<double>(dim_);
      return tc;
    }
    case Kind::FloorOf:
      return inner_->tail_class();
  }
  return {};
}

TailClass InnovationLaw::tail_class_linear() const {
  switch (kind_) {
    case Kind::LogPareto:
      return {Moment::Infinite, Regularity::Yes, kInf, kInf};
    case Kind::ParetoTail:
      return {Moment::Infinite, Regularity::Yes, a_, a_};
    case Kind::Geometric:
    case Kind::Poisson:
    case Kind::Deterministic:
      return {Moment::Finite, Regularity::Yes, 0.0, 0.0};
    case Kind::DiscreteTable: {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      return {Moment::Unknown, Regularity::Unknown, nan, nan};
    }
    case Kind::ScaledVector: {
      TailClass tc = inner_->tail_class_linear();
      tc.limsup *= static_cast<double>(dim_);
      tc.liminf *= static_cast<double>(dim_);
      return tc;
    }
    case Kind::FloorOf:
      return inner_->tail_class_linear();
  }
  return {};
}

std::string InnovationLaw::describe() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind_) {
    case Kind::LogPareto: os << "log_pareto(beta=" << a_ << ", p=" << b_ << ")"; break;
    case Kind::ParetoTail: os << "pareto_tail(a=" << a_ << ")"; break;
    case Kind::Geometric: os << "geometric(q=" << a_ << ")"; break;
    case Kind::Poisson: os << "poisson(mean=" << a_ << ")"; break;
    case Kind::DiscreteTable: os << "discrete_table(" << values_.size() << " atoms)"; break;
    case Kind::Deterministic: os << "deterministic(" << a_ << ")"; break;
    case Kind::ScaledVector: os << "scaled_vector(" << inner_->describe() << ", d=" << dim_ << ")"; break;
    case Kind::FloorOf: os << "floor(" << inner_->describe() << ")"; break;
  }
  return os.str();
}

double ks_statistic(const InnovationLaw& law, std::vector<double> sample) {
  if (sample.empty()) throw Error(ErrorCode::InvalidArgument, "KS statistic of an empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  std::size_t i = 0;
  while (i < sample.size()) {
    std::size_t j = i;
    while (j < sample.size() && sample[j] == sample[i]) ++j;
    const double x = sample[i];
    d = std::max(d, std::abs(static_cast<double>(i) / n - law.cdf_below(x)));
    d = std::max(d, std::abs(static_cast<double>(j) / n - law.cdf(x)));
    i = j;
  }
  return d;
}

}  // namespace arrec::dist
