#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "core/dist.hpp"
#include "core/matrix_env.hpp"

namespace arrec::cls {

enum class Outcome { PositiveRecurrent, Recurrent, Transient, Inconclusive };
const char* to_string(Outcome o) noexcept;
/// PositiveRecurrent and Recurrent both count as recurrent.
bool is_recurrent(Outcome o) noexcept;

struct TracePoint {
  double n = 0.0;
  double value = 0.0;
};

struct AnchorResult {
  double y = 0.0;
  bool zero_anchor = false;
  Outcome outcome = Outcome::Inconclusive;
  double raabe_limit = 0.0;
};

struct Verdict {
  Outcome outcome = Outcome::Inconclusive;
  std::string rationale;
  std::vector<TracePoint> raabe_trace;     // r_n = n (1 - factor_n), log-spaced n
  std::vector<TracePoint> partial_log;     // ln prod_{m<=n} factor_m, log-spaced n
  std::vector<std::string> flags;
  double raabe_limit = 0.0;                // median of r_n over the last decade
  std::optional<double> bertrand_gamma;
  std::optional<double> bertrand_se;
  std::vector<AnchorResult> anchors;
  double lambda = 0.0;
  std::string lambda_source;
};

inline constexpr double kDefaultTau = 0.05;
inline constexpr std::size_t kDefaultNMax = 1'000'000;

// The series sum_n prod_{m=0}^n (1 - tail(m)), where tail(m) is the
// probability that the m-th factor's event fails.
struct SeriesSpec {
  std::function<double(double m)> tail;
  std::optional<dist::TailClass> tail_class;
  /// When the log moment is finite, report PositiveRecurrent (AR-type chains)
  /// instead of Recurrent.
  bool positive_recurrence_shortcut = true;
  std::size_t n_max = kDefaultNMax;
  double tau = kDefaultTau;
};

/// Throws ZeroAnchor if the first factor vanishes and InvariantViolation if
/// the log partial products fail to be nonincreasing.
Verdict series_verdict(const SeriesSpec& spec);

/// Tail class used by the ladder: bounded laws count as Finite even when the
/// law itself reports Unknown.
dist::TailClass effective_tail_class(const dist::InnovationLaw& law);
dist::TailClass effective_tail_class_linear(const dist::InnovationLaw& law);

struct SeriesOptions {
  std::size_t n_max = kDefaultNMax;
  double tau = kDefaultTau;
  /// Only ar_verdict uses this; the other criteria never claim positive
  /// recurrence.
  bool positive_recurrence_shortcut = true;
};

/// Criterion for AR / max-AR / branching: factors P[||Y|| <= y e^{m lambda}].
Verdict ar_verdict(const dist::InnovationLaw& law, double lambda, double y,
                   const SeriesOptions& options = {});

/// Factors P[W <= y + m] for an integer-valued W.
Verdict kesten_kellerer_verdict(const dist::InnovationLaw& w_law, double y = 0.0,
                                const SeriesOptions& options = {});

/// Factors P[W <= y + m E[T]]. Throws NonpositiveDrift if E[T] <= 0.
Verdict exchange_verdict(const dist::InnovationLaw& t_law, const dist::InnovationLaw& w_law, double y,
                         const SeriesOptions& options = {});

/// Factors P[Y_0 <= y rho^{-m}] with rho = frog_rho(p, r).
Verdict frog_verdict(double p, double r, const dist::InnovationLaw& sleep_law, double y,
                     const SeriesOptions& options = {});

enum class CookieOutcome { TransientLeft, Recurrent, TransientRight, Inconclusive };
const char* to_string(CookieOutcome o) noexcept;

struct CookieVerdict {
  CookieOutcome outcome = CookieOutcome::Inconclusive;
  double mean_log_rho = 0.0;
  Verdict series;
};

/// Throws WrongRegime if E[ln rho_0] <= 0.
CookieVerdict cookie_verdict(const dist::InnovationLaw& omega_law, const dist::InnovationLaw& cookie_law,
                             double y = 1.0, const SeriesOptions& options = {});

enum class Sufficient { Recurrent, Transient, Gap, Unknown };
const char* to_string(Sufficient s) noexcept;

struct SufficientReport {
  Sufficient result = Sufficient::Unknown;
  double liminf = 0.0;
  double limsup = 0.0;
  double lambda = 0.0;
};

/// Compares the limits of t P[ln Y > t] with lambda.
SufficientReport sufficient_conditions(const dist::InnovationLaw& law, double lambda);
SufficientReport sufficient_conditions(const dist::TailClass& tc, double lambda);

/// Runs ar_verdict at every anchor, skipping anchors below the support, and
/// returns the consensus. Throws AnchorDisagreement if resolved anchors
/// disagree and ZeroAnchor if every anchor is below the support.
Verdict anchor_scan(const dist::InnovationLaw& law, double lambda, const std::vector<double>& y_grid,
                    const SeriesOptions& options = {});

/// Generic anchor scan over a verdict factory.
Verdict anchor_scan_with(const std::function<Verdict(double y)>& at, const std::vector<double>& y_grid);

struct LambdaInfo {
  double lambda = 0.0;
  double half_width = 0.0;
  std::string source;  // "scalar_exact", "perron", "estimated"
};

/// Exact for d = 1, -ln(spectral radius) for a constant primitive matrix,
/// Monte Carlo otherwise.
LambdaInfo resolve_lambda(const env::MatrixEnsemble& ensemble, const env::LyapunovOptions& options);

/// Full AR classification: anchor scan at the resolved lambda, re-run at
/// lambda -/+ half-width when estimated, sufficient-condition cross-check.
Verdict classify_ar(const env::MatrixEnsemble& ensemble, const dist::InnovationLaw& law,
                    const std::vector<double>& y_grid, const SeriesOptions& options,
                    const env::LyapunovOptions& lyapunov);

}  // namespace arrec::cls
