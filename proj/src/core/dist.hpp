#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "core/matrix.hpp"
#include "core/rng.hpp"

namespace arrec::dist {

enum class Kind {
  LogPareto,      // P[ln(1+Y) > t] = (1 + beta t)^-p
  ParetoTail,     // P[Y > x] = min(1, a/x)
  Geometric,      // P[Y = k] = q (1-q)^k, k >= 0
  Poisson,
  DiscreteTable,
  Deterministic,
  ScaledVector,   // d i.i.d. copies of a scalar law; the norm is their maximum
  FloorOf,        // integer part of another law
};

enum class Moment { Finite, Infinite, Unknown };
enum class Regularity { Yes, No, Unknown };

const char* to_string(Kind kind) noexcept;
const char* to_string(Moment m) noexcept;
const char* to_string(Regularity r) noexcept;

// Asymptotics of t * P[ln Y > t] (or of t * P[Y > t] for tail_class_linear).
struct TailClass {
  Moment log_moment = Moment::Unknown;
  Regularity reg = Regularity::Unknown;
  double limsup = 0.0;  // may be +inf; NaN when unknown
  double liminf = 0.0;
};

class InnovationLaw {
 public:
  static constexpr std::size_t kMaxTableAtoms = 100000;

  static InnovationLaw log_pareto(double beta, double p);
  static InnovationLaw pareto_tail(double a);
  static InnovationLaw geometric(double q);
  static InnovationLaw poisson(double mean);
  static InnovationLaw discrete_table(std::vector<double> values, std::vector<double> probs);
  static InnovationLaw deterministic(double v);
  static InnovationLaw scaled_vector(const InnovationLaw& component, std::size_t dim);
  static InnovationLaw floor_of(const InnovationLaw& inner);

  Kind kind() const noexcept { return kind_; }
  /// Number of components of a sample (1 except for ScaledVector).
  std::size_t dim() const noexcept { return dim_; }
  /// Lifts a scalar law to `dim` i.i.d. components; returns *this if already
  /// of that dimension.
  InnovationLaw lifted(std::size_t dim) const;

  // Distribution of the norm ||Y|| (= Y for scalar laws).
  double cdf(double x) const;
  double tail(double x) const { return 1.0 - cdf(x); }
  /// P[||Y|| < x].
  double cdf_below(double x) const;
  /// P[||Y|| > e^u], evaluated without forming e^u where possible.
  double tail_log(double u) const;
  /// P[||Y|| <= e^u].
  double cdf_log(double u) const { return 1.0 - tail_log(u); }
  double quantile(double prob) const;
  double median() const { return quantile(0.5); }
  /// E||Y||, possibly +inf.
  double mean() const;

  /// Scalar draw (the norm for ScaledVector). Saturates at DBL_MAX.
  double sample(Stream& rng) const;
  /// ln of a scalar draw without overflow; -inf for a zero draw.
  double sample_log(Stream& rng) const;
  Vector sample_vector(Stream& rng) const;

  bool integer_valued() const;
  bool bounded_support() const;

  /// Behaviour of t P[ln||Y|| > t].
  TailClass tail_class() const;
  /// Behaviour of t P[||Y|| > t], i.e. the tail class of e^Y.
  TailClass tail_class_linear() const;

  std::string describe() const;

  // Parameters, meaningful per kind.
  double beta() const noexcept { return a_; }
  double p() const noexcept { return b_; }
  double scale() const noexcept { return a_; }
  double q() const noexcept { return a_; }
  double value() const noexcept { return a_; }
  const std::vector<double>& values() const noexcept { return values_; }
  const std::vector<double>& probs() const noexcept { return probs_; }
  const InnovationLaw* inner() const noexcept { return inner_.get(); }

 private:
  InnovationLaw(Kind kind, double a, double b) : kind_(kind), a_(a), b_(b) {}

  double component_sample(Stream& rng) const;
  double poisson_cdf(double k) const;

  Kind kind_;
  double a_ = 0.0;
  double b_ = 0.0;
  std::size_t dim_ = 1;
  std::vector<double> values_;
  std::vector<double> probs_;
  std::vector<double> cumulative_;
  std::shared_ptr<const InnovationLaw> inner_;
};

/// Two-sided Kolmogorov-Smirnov distance between a sample and the law's cdf,
/// accounting for atoms.
double ks_statistic(const InnovationLaw& law, std::vector<double> sample);

}  // namespace arrec::dist
