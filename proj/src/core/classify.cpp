#include "core/classify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "core/cookie.hpp"
#include "core/error.hpp"
#include "core/frog.hpp"

namespace arrec::cls {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kResolveMultiplier = 2.576;
constexpr std::size_t kTracePerDecade = 40;
constexpr std::size_t kBertrandStart = 100;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

std::vector<std::size_t> log_grid(std::size_t n_max) {
  std::vector<std::size_t> grid;
  const double top = std::log10(static_cast<double>(n_max));
  const auto count = static_cast<std::size_t>(std::ceil(top * kTracePerDecade));
  for (std::size_t k = 0; k <= count; ++k) {
    const double e = std::min(top, static_cast<double>(k) / kTracePerDecade);
    const auto n = static_cast<std::size_t>(std::llround(std::pow(10.0, e)));
    if (grid.empty() || n > grid.back()) grid.push_back(std::min(n, n_max));
  }
  if (grid.back() != n_max) grid.push_back(n_max);
  return grid;
}

double median_of(std::vector<double>& v) {
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

void add_flag(Verdict& v, const std::string& flag) {
  if (std::find(v.flags.begin(), v.flags.end(), flag) == v.flags.end()) v.flags.push_back(flag);
}

struct Fit {
  double slope = 0.0;
  double se = 0.0;
};

Fit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const double k = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= k;
  my /= k;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  Fit fit;
  fit.slope = sxy / sxx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - my - fit.slope * (x[i] - mx);
    ssr += e * e;
  }
  fit.se = x.size() > 2 ? std::sqrt(ssr / (k - 2.0) / sxx) : kInf;
  return fit;
}

double log_tail_at(const dist::InnovationLaw& law, double x) {
  if (x > 0.0) return law.tail_log(std::log(x));
  return 1.0 - law.cdf(x);
}

}  // namespace

const char* to_string(Outcome o) noexcept {
  switch (o) {
    case Outcome::PositiveRecurrent: return "PositiveRecurrent";
    case Outcome::Recurrent: return "Recurrent";
    case Outcome::Transient: return "Transient";
    case Outcome::Inconclusive: return "Inconclusive";
  }
  return "Inconclusive";
}

bool is_recurrent(Outcome o) noexcept {
  return o == Outcome::PositiveRecurrent || o == Outcome::Recurrent;
}

const char* to_string(CookieOutcome o) noexcept {
  switch (o) {
    case CookieOutcome::TransientLeft: return "TransientLeft";
    case CookieOutcome::Recurrent: return "Recurrent";
    case CookieOutcome::TransientRight: return "TransientRight";
    case CookieOutcome::Inconclusive: return "Inconclusive";
  }
  return "Inconclusive";
}

const char* to_string(Sufficient s) noexcept {
  switch (s) {
    case Sufficient::Recurrent: return "Recurrent";
    case Sufficient::Transient: return "Transient";
    case Sufficient::Gap: return "Gap";
    case Sufficient::Unknown: return "Unknown";
  }
  return "Unknown";
}

Verdict series_verdict(const SeriesSpec& spec) {
  if (!spec.tail) throw Error(ErrorCode::InvalidArgument, "series needs a tail function");
  if (spec.n_max < 1000) throw Error(ErrorCode::InvalidArgument, "series n_max must be at least 1000");
  if (!(spec.tau > 0.0 && spec.tau < 1.0)) throw Error(ErrorCode::InvalidArgument, "tau must lie in (0, 1)");

  const double t0 = std::clamp(spec.tail(0.0), 0.0, 1.0);
  if (!(t0 < 1.0)) {
    throw Error(ErrorCode::ZeroAnchor, "the first factor is 0: the anchor lies below the support");
  }

  const std::size_t n_max = spec.n_max;
  const std::size_t decade_start = n_max / 10;
  const std::vector<std::size_t> grid = log_grid(n_max);
  std::size_t next_grid = 0;

  Verdict v;
  std::vector<double> last_decade;
  last_decade.reserve(n_max - decade_start + 1);
  std::vector<double> grid_log(grid.size(), 0.0);

  double log_prod = std::log1p(-t0);
  double prev = log_prod;
  bool exhausted = false;  // all remaining factors are exactly 1
  for (std::size_t n = 1; n <= n_max; ++n) {
    double t = 0.0;
    if (!exhausted) {
      t = std::clamp(spec.tail(static_cast<double>(n)), 0.0, 1.0);
      if (std::isnan(t)) throw Error(ErrorCode::InvariantViolation, "tail evaluated to NaN");
      if (t == 0.0) exhausted = true;
      log_prod += std::log1p(-t);
      if (!(log_prod <= prev)) {
        throw Error(ErrorCode::InvariantViolation,
                    "log partial products increased at n = " + std::to_string(n));
      }
      prev = log_prod;
    }
    const double r = static_cast<double>(n) * t;
    if (n >= decade_start) last_decade.push_back(r);
    while (next_grid < grid.size() && grid[next_grid] == n) {
      v.raabe_trace.push_back({static_cast<double>(n), r});
      v.partial_log.push_back({static_cast<double>(n), log_prod});
      grid_log[next_grid] = log_prod;
      ++next_grid;
    }
  }

  v.raabe_limit = median_of(last_decade);
  const double tau = spec.tau;
  const double L = v.raabe_limit;

  const bool finite_moment = spec.tail_class && spec.tail_class->log_moment == dist::Moment::Finite;
  if (!spec.tail_class || spec.tail_class->log_moment == dist::Moment::Unknown ||
      spec.tail_class->reg != dist::Regularity::Yes) {
    add_flag(v, "hypothesis_unverified");
  }

  if (finite_moment) {
    v.outcome = spec.positive_recurrence_shortcut ? Outcome::PositiveRecurrent : Outcome::Recurrent;
    v.rationale = "finite logarithmic moment of the innovation";
    if (L > 1.0 + tau) add_flag(v, "series_disagrees");
    return v;
  }
  if (L < 1.0 - tau) {
    v.outcome = Outcome::Recurrent;
    v.rationale = "Raabe limit " + fmt(L) + " < 1 - tau: the series diverges";
    return v;
  }
  if (L > 1.0 + tau) {
    v.outcome = Outcome::Transient;
    v.rationale = "Raabe limit " + fmt(L) + " > 1 + tau: the series converges";
    return v;
  }

  // Bertrand refinement: ln a_n + ln n ~ c - gamma ln ln n.
  std::vector<double> xs, ys;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (grid[k] < kBertrandStart || !std::isfinite(grid_log[k])) continue;
    const double n = static_cast<double>(grid[k]);
    xs.push_back(std::log(std::log(n)));
    ys.push_back(grid_log[k] + std::log(n));
  }
  if (xs.size() < 3) {
    v.outcome = Outcome::Inconclusive;
    v.rationale = "Raabe limit " + fmt(L) + " is within tau of 1 and too few points for a refinement";
    return v;
  }
  const Fit fit = least_squares(xs, ys);
  const double gamma = -fit.slope;
  v.bertrand_gamma = gamma;
  v.bertrand_se = fit.se;
  const double gap = std::abs(gamma - 1.0);
  if (gap > tau && gap > kResolveMultiplier * fit.se) {
    v.outcome = gamma > 1.0 ? Outcome::Transient : Outcome::Recurrent;
    v.rationale = "Raabe limit " + fmt(L) + " is near 1; Bertrand exponent " + fmt(gamma) +
                  (gamma > 1.0 ? " > 1: the series converges" : " < 1: the series diverges");
  } else {
    v.outcome = Outcome::Inconclusive;
    v.rationale = "Raabe limit " + fmt(L) + " and Bertrand exponent " + fmt(gamma) +
                  " are not resolved away from 1";
  }
  return v;
}

dist::TailClass effective_tail_class(const dist::InnovationLaw& law) {
  if (law.bounded_support()) return {dist::Moment::Finite, dist::Regularity::Yes, 0.0, 0.0};
  return law.tail_class();
}

dist::TailClass effective_tail_class_linear(const dist::InnovationLaw& law) {
  if (law.bounded_support()) return {dist::Moment::Finite, dist::Regularity::Yes, 0.0, 0.0};
  return law.tail_class_linear();
}

Verdict ar_verdict(const dist::InnovationLaw& law, double lambda, double y, const SeriesOptions& options) {
  if (!(lambda > 0.0)) throw Error(ErrorCode::WrongRegime, "lambda must be positive, got " + fmt(lambda));
  if (!(y > 0.0)) throw Error(ErrorCode::InvalidArgument, "anchor y must be positive");
  const double u0 = std::log(y);
  SeriesSpec spec;
  spec.tail = [&law, u0, lambda](double m) { return law.tail_log(m == 0.0 ? u0 : u0 + m * lambda); };
  spec.tail_class = effective_tail_class(law);
  spec.positive_recurrence_shortcut = options.positive_recurrence_shortcut;
  spec.n_max = options.n_max;
  spec.tau = options.tau;
  Verdict v = series_verdict(spec);
  v.lambda = lambda;
  v.anchors.push_back({y, false, v.outcome, v.raabe_limit});
  return v;
}

Verdict kesten_kellerer_verdict(const dist::InnovationLaw& w_law, double y, const SeriesOptions& options) {
  if (!w_law.integer_valued()) throw Error(ErrorCode::InvalidArgument, "Kesten-Kellerer needs an integer-valued W");
  if (!(y >= 0.0)) throw Error(ErrorCode::InvalidArgument, "anchor y must be >= 0");
  SeriesSpec spec;
  spec.tail = [&w_law, y](double m) { return log_tail_at(w_law, y + m); };
  spec.tail_class = effective_tail_class_linear(w_law);
  spec.positive_recurrence_shortcut = false;
  spec.n_max = options.n_max;
  spec.tau = options.tau;
  Verdict v = series_verdict(spec);
  v.lambda = 1.0;
  v.lambda_source = "unit_drift";
  v.anchors.push_back({y, false, v.outcome, v.raabe_limit});
  return v;
}

Verdict exchange_verdict(const dist::InnovationLaw& t_law, const dist::InnovationLaw& w_law, double y,
                         const SeriesOptions& options) {
  if (!t_law.bounded_support()) throw Error(ErrorCode::InvalidArgument, "exchange process needs a bounded T");
  const double drift = t_law.mean();
  if (!(drift > 0.0)) throw Error(ErrorCode::NonpositiveDrift, "E[T] must be positive, got " + fmt(drift));
  if (!(y >= 0.0)) throw Error(ErrorCode::InvalidArgument, "anchor y must be >= 0");
  SeriesSpec spec;
  spec.tail = [&w_law, y, drift](double m) { return log_tail_at(w_law, y + m * drift); };
  spec.tail_class = effective_tail_class_linear(w_law);
  spec.positive_recurrence_shortcut = false;
  spec.n_max = options.n_max;
  spec.tau = options.tau;
  Verdict v = series_verdict(spec);
  v.lambda = drift;
  v.lambda_source = "mean_decrement";
  v.anchors.push_back({y, false, v.outcome, v.raabe_limit});
  return v;
}

Verdict frog_verdict(double p, double r, const dist::InnovationLaw& sleep_law, double y,
                     const SeriesOptions& options) {
  const double rho = proc::frog_rho(p, r);
  const double lambda = -std::log(rho);
  if (!(y > 0.0)) throw Error(ErrorCode::InvalidArgument, "anchor y must be positive");
  const double u0 = std::log(y);
  SeriesSpec spec;
  spec.tail = [&sleep_law, u0, lambda](double m) { return sleep_law.tail_log(u0 + m * lambda); };
  spec.tail_class = effective_tail_class(sleep_law);
  spec.positive_recurrence_shortcut = false;
  spec.n_max = options.n_max;
  spec.tau = options.tau;
  Verdict v = series_verdict(spec);
  v.lambda = lambda;
  v.lambda_source = "frog_rho";
  v.anchors.push_back({y, false, v.outcome, v.raabe_limit});
  return v;
}

CookieVerdict cookie_verdict(const dist::InnovationLaw& omega_law, const dist::InnovationLaw& cookie_law,
                             double y, const SeriesOptions& options) {
  CookieVerdict out;
  out.mean_log_rho = proc::mean_log_rho(omega_law);
  if (!(out.mean_log_rho > 0.0)) {
    throw Error(ErrorCode::WrongRegime, "E[ln rho_0] = " + fmt(out.mean_log_rho) + " is not positive");
  }
  if (!(cookie_law.cdf(0.0) > 0.0)) {
    throw Error(ErrorCode::ZeroAnchor, "the cookie law must put positive mass on 0");
  }
  if (!(y > 0.0)) throw Error(ErrorCode::InvalidArgument, "anchor y must be positive");
  const dist::TailClass tc = effective_tail_class(cookie_law);
  const double mu = out.mean_log_rho;
  const double u0 = std::log(y);
  SeriesSpec spec;
  spec.tail = [&cookie_law, u0, mu](double m) { return cookie_law.tail_log(u0 + m * mu); };
  spec.tail_class = tc;
  spec.positive_recurrence_shortcut = false;
  spec.n_max = options.n_max;
  spec.tau = options.tau;
  out.series = series_verdict(spec);
  out.series.lambda = mu;
  out.series.lambda_source = "mean_log_rho";
  out.series.anchors.push_back({y, false, out.series.outcome, out.series.raabe_limit});
  if (tc.log_moment == dist::Moment::Finite) {
    out.outcome = CookieOutcome::TransientLeft;
    out.series.rationale = "finite logarithmic moment of the cookie law: transient to the left";
  } else if (out.series.outcome == Outcome::Recurrent) {
    out.outcome = CookieOutcome::Recurrent;
  } else if (out.series.outcome == Outcome::Transient) {
    out.outcome = CookieOutcome::TransientRight;
  } else {
    out.outcome = CookieOutcome::Inconclusive;
  }
  return out;
}

SufficientReport sufficient_conditions(const dist::TailClass& tc, double lambda) {
  SufficientReport rep;
  rep.lambda = lambda;
  rep.liminf = tc.liminf;
  rep.limsup = tc.limsup;
  if (tc.log_moment == dist::Moment::Unknown || std::isnan(tc.liminf) || std::isnan(tc.limsup)) {
    rep.result = Sufficient::Unknown;
  } else if (tc.liminf > lambda) {
    rep.result = Sufficient::Transient;
  } else if (tc.limsup < lambda) {
    rep.result = Sufficient::Recurrent;
  } else {
    rep.result = Sufficient::Gap;
  }
  return rep;
}

SufficientReport sufficient_conditions(const dist::InnovationLaw& law, double lambda) {
  return sufficient_conditions(law.tail_class(), lambda);
}

Verdict anchor_scan_with(const std::function<Verdict(double y)>& at, const std::vector<double>& y_grid) {
  if (y_grid.empty()) throw Error(ErrorCode::InvalidArgument, "anchor grid is empty");
  std::vector<AnchorResult> anchors;
  std::optional<Verdict> chosen;
  std::optional<Verdict> first_any;
  for (double y : y_grid) {
    try {
      Verdict v = at(y);
      anchors.push_back({y, false, v.outcome, v.raabe_limit});
      if (!first_any) first_any = v;
      if (v.outcome == Outcome::Inconclusive) continue;
      if (!chosen) {
        chosen = std::move(v);
      } else if (is_recurrent(chosen->outcome) != is_recurrent(v.outcome)) {
        std::string detail;
        for (const AnchorResult& a : anchors) {
          detail += " y=" + fmt(a.y) + ":" + (a.zero_anchor ? "zero_anchor" : to_string(a.outcome)) +
                    "(L=" + fmt(a.raabe_limit) + ")";
        }
        throw Error(ErrorCode::AnchorDisagreement, "verdicts differ across anchors:" + detail);
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::ZeroAnchor) throw;
      anchors.push_back({y, true, Outcome::Inconclusive, 0.0});
    }
  }
  if (!first_any) throw Error(ErrorCode::ZeroAnchor, "every anchor lies below the support");
  Verdict out = chosen ? std::move(*chosen) : std::move(*first_any);
  out.anchors = std::move(anchors);
  return out;
}

Verdict anchor_scan(const dist::InnovationLaw& law, double lambda, const std::vector<double>& y_grid,
                    const SeriesOptions& options) {
  return anchor_scan_with([&](double y) { return ar_verdict(law, lambda, y, options); }, y_grid);
}

LambdaInfo resolve_lambda(const env::MatrixEnsemble& ensemble, const env::LyapunovOptions& options) {
  LambdaInfo info;
  if (ensemble.dim() == 1) {
    info.lambda = env::scalar_lyapunov(ensemble);
    info.source = "scalar_exact";
    return info;
  }
  if (ensemble.is_constant()) {
    const Matrix a = ensemble.support().front();
    if (env::is_primitive(a)) {
      info.lambda = -std::log(env::spectral_radius(a).rho);
      info.source = "perron";
      return info;
    }
  }
  const env::LyapunovEstimate est = env::estimate_lyapunov(ensemble, options);
  info.lambda = est.lambda_hat;
  info.half_width = est.half_width;
  info.source = "estimated";
  return info;
}

Verdict classify_ar(const env::MatrixEnsemble& ensemble, const dist::InnovationLaw& law,
                    const std::vector<double>& y_grid, const SeriesOptions& options,
                    const env::LyapunovOptions& lyapunov) {
  const dist::InnovationLaw lifted = law.lifted(ensemble.dim());
  const LambdaInfo info = resolve_lambda(ensemble, lyapunov);
  if (!(info.lambda > 0.0)) {
    throw Error(ErrorCode::WrongRegime, "Lyapunov exponent gives lambda = " + fmt(info.lambda) +
                                            "; the criterion needs a contractive environment");
  }
  Verdict v = anchor_scan(lifted, info.lambda, y_grid, options);
  v.lambda = info.lambda;
  v.lambda_source = info.source;

  if (info.half_width > 0.0) {
    for (double shifted : {info.lambda - info.half_width, info.lambda + info.half_width}) {
      bool changed = false;
      if (!(shifted > 0.0)) {
        changed = true;
      } else {
        try {
          const Verdict alt = anchor_scan(lifted, shifted, y_grid, options);
          changed = alt.outcome != v.outcome;
        } catch (const Error&) {
          changed = true;
        }
      }
      if (changed) add_flag(v, "lambda_uncertain");
    }
  }

  const SufficientReport suff = sufficient_conditions(effective_tail_class(lifted), info.lambda);
  if (suff.result == Sufficient::Recurrent || suff.result == Sufficient::Transient) {
    add_flag(v, std::string("sufficient_condition_") + (suff.result == Sufficient::Recurrent ? "recurrent" : "transient"));
    const bool agree = (suff.result == Sufficient::Recurrent) == is_recurrent(v.outcome);
    if (v.outcome != Outcome::Inconclusive && !agree) add_flag(v, "sufficient_condition_conflict");
  }
  return v;
}

}  // namespace arrec::cls
