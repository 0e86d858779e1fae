#include "core/probe.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "core/cookie.hpp"
#include "core/error.hpp"
#include "core/frog.hpp"
#include "core/parallel.hpp"

namespace arrec::harness {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double logaddexp(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

// A chain observed through a scalar level; levels are compared with ln b when
// log_scale() is true and with b otherwise.
class Stepper {
 public:
  virtual ~Stepper() = default;
  virtual void step(Stream& rng) = 0;
  virtual double level() const = 0;
  virtual bool log_scale() const = 0;
  virtual double position() const { return level(); }
  virtual bool overflowed() const { return false; }
};

// AR or max-AR kept as X = e^s v with ||v||_inf = 1, so heavy innovations
// never overflow.
class LogArStepper final : public Stepper {
 public:
  LogArStepper(const env::MatrixEnsemble& ensemble, dist::InnovationLaw law, bool max_mode, Stream& rng)
      : ensemble_(ensemble), law_(std::move(law)), max_mode_(max_mode), d_(ensemble.dim()),
        v_(d_, 0.0), ly_(d_, -kInf) {
    draw_log_innovation(rng);
    assign(ly_);
  }

  void step(Stream& rng) override {
    const Matrix& a = ensemble_.sample(rng);
    draw_log_innovation(rng);
    Vector combined(d_, -kInf);
    const Vector w = multiply(a, v_);
    for (std::size_t i = 0; i < d_; ++i) {
      const double lx = (s_ == -kInf || w[i] == 0.0) ? -kInf : s_ + std::log(w[i]);
      combined[i] = max_mode_ ? std::max(lx, ly_[i]) : logaddexp(lx, ly_[i]);
    }
    assign(combined);
  }

  double level() const override { return s_; }
  bool log_scale() const override { return true; }

 private:
  void draw_log_innovation(Stream& rng) {
    if (law_.kind() == dist::Kind::ScaledVector) {
      for (std::size_t i = 0; i < d_; ++i) ly_[i] = law_.inner()->sample_log(rng);
    } else {
      ly_[0] = law_.sample_log(rng);
    }
  }

  void assign(const Vector& logs) {
    s_ = *std::max_element(logs.begin(), logs.end());
    for (std::size_t i = 0; i < d_; ++i) v_[i] = s_ == -kInf ? 0.0 : std::exp(logs[i] - s_);
  }

  const env::MatrixEnsemble& ensemble_;
  dist::InnovationLaw law_;
  bool max_mode_;
  std::size_t d_;
  double s_ = -kInf;
  Vector v_;
  Vector ly_;
};

class BranchingStepper final : public Stepper {
 public:
  BranchingStepper(const env::MatrixEnsemble& ensemble, dist::InnovationLaw law, proc::OffspringFamily family,
                   Stream& rng)
      : ensemble_(ensemble), law_(std::move(law)), family_(family) {
    try {
      state_ = proc::branching_start(proc::floor_counts(law_.sample_vector(rng)));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::PopulationOverflow) throw;
      overflow_ = true;
    }
  }

  void step(Stream& rng) override {
    if (overflow_) return;
    const Matrix& a = ensemble_.sample(rng);
    try {
      proc::branching_step(state_, a, family_, proc::floor_counts(law_.sample_vector(rng)), rng);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::PopulationOverflow) throw;
      overflow_ = true;
    }
  }

  double level() const override {
    if (overflow_) return kInf;
    const auto top = *std::max_element(state_.z.begin(), state_.z.end());
    return top == 0 ? -kInf : std::log(static_cast<double>(top));
  }
  bool log_scale() const override { return true; }
  bool overflowed() const override { return overflow_; }

 private:
  const env::MatrixEnsemble& ensemble_;
  dist::InnovationLaw law_;
  proc::OffspringFamily family_;
  proc::BranchingState state_;
  bool overflow_ = false;
};

class ExchangeStepper final : public Stepper {
 public:
  ExchangeStepper(const dist::InnovationLaw& t_law, const dist::InnovationLaw& w_law, Stream& rng)
      : t_law_(t_law), w_law_(w_law) {
    state_.r = w_law_.sample(rng);
  }
  void step(Stream& rng) override {
    const double t = t_law_.sample(rng);
    state_ = proc::exchange_step(state_, t, w_law_.sample(rng));
  }
  double level() const override { return state_.r; }
  bool log_scale() const override { return false; }

 private:
  const dist::InnovationLaw& t_law_;
  const dist::InnovationLaw& w_law_;
  proc::ExchangeState state_;
};

class CookieStepper final : public Stepper {
 public:
  explicit CookieStepper(const proc::CookieWalkConfig& config) : walk_(config) {}
  void step(Stream& rng) override { walk_.step(rng); }
  double level() const override { return std::abs(static_cast<double>(walk_.position())); }
  double position() const override { return static_cast<double>(walk_.position()); }
  bool log_scale() const override { return false; }

 private:
  proc::CookieWalk walk_;
};

struct ReplicaResult {
  std::vector<std::vector<std::uint64_t>> visits;  // [b][checkpoint]
  bool diverged = false;
  double final_position = 0.0;
  bool overflow = false;
};

std::vector<std::uint64_t> decade_checkpoints(std::uint64_t horizon) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t t = 10; t <= horizon; t *= 10) {
    out.push_back(t);
    if (t > horizon / 10) break;
  }
  if (out.empty() || out.back() != horizon) out.push_back(horizon);
  return out;
}

void fit_growth(const std::vector<std::uint64_t>& checkpoints, const std::vector<double>& mean, ProbeReport& rep) {
  const std::size_t k = checkpoints.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    mx += std::log(static_cast<double>(checkpoints[i]));
    my += mean[i];
  }
  mx /= static_cast<double>(k);
  my /= static_cast<double>(k);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double dx = std::log(static_cast<double>(checkpoints[i])) - mx;
    const double dy = mean[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  rep.growth_slope = sxx > 0.0 ? sxy / sxx : 0.0;
  rep.growth_r2 = (sxx > 0.0 && syy > 0.0) ? (sxy * sxy) / (sxx * syy) : 0.0;
}

ProbeReport probe_frog(const ProcessSpec& process, const ProbeSpec& spec) {
  proc::FrogConfig cfg;
  cfg.p = process.frog_p;
  cfg.r = process.frog_r;
  cfg.sleep_law = *process.innovation;
  cfg.site_cap = process.site_cap;
  cfg.wake_cap = process.wake_cap;
  std::vector<proc::FrogOutcome> outcomes(spec.replicas);
  const Stream root(spec.seed);
  parallel_for(spec.replicas, spec.workers, [&](std::size_t i) {
    Stream rng = root.child(i);
    outcomes[i] = proc::simulate_frog(cfg, rng);
  });
  ProbeReport rep;
  rep.runs = spec.replicas;
  std::size_t clean = 0;
  double woken = 0.0;
  for (const auto& o : outcomes) {
    if (!o.truncated) ++clean;
    woken += static_cast<double>(o.woken_count);
  }
  rep.untruncated_fraction = static_cast<double>(clean) / static_cast<double>(spec.replicas);
  rep.divergence_fraction = 1.0 - rep.untruncated_fraction;
  rep.mean_woken = woken / static_cast<double>(spec.replicas);
  if (rep.untruncated_fraction >= kDivergenceThreshold) {
    rep.hint = Hint::RecurrentLike;
  } else if (rep.divergence_fraction >= kDivergenceThreshold) {
    rep.hint = Hint::TransientLike;
  } else {
    rep.hint = Hint::Ambiguous;
  }
  return rep;
}

}  // namespace

const char* to_string(ProcessKind k) noexcept {
  switch (k) {
    case ProcessKind::Ar: return "ar";
    case ProcessKind::MaxAr: return "max_ar";
    case ProcessKind::Branching: return "branching";
    case ProcessKind::Exchange: return "exchange";
    case ProcessKind::Frog: return "frog";
    case ProcessKind::CookieWalk: return "cookie_walk";
  }
  return "unknown";
}

const char* to_string(Hint h) noexcept {
  switch (h) {
    case Hint::RecurrentLike: return "RecurrentLike";
    case Hint::TransientLike: return "TransientLike";
    case Hint::Ambiguous: return "Ambiguous";
  }
  return "Ambiguous";
}

const char* to_string(AgreementStatus s) noexcept {
  switch (s) {
    case AgreementStatus::Pass: return "PASS";
    case AgreementStatus::Fail: return "FAIL";
    case AgreementStatus::Neutral: return "NEUTRAL";
  }
  return "NEUTRAL";
}

std::vector<double> default_b_grid(const ProcessSpec& process) {
  double scale = 1.0;
  if (process.kind != ProcessKind::CookieWalk && process.kind != ProcessKind::Frog && process.innovation) {
    const double med = process.innovation->median();
    if (med > 0.0 && std::isfinite(med) && med < 1e300) scale = med;
  }
  return {scale, 10.0 * scale, 100.0 * scale};
}

ProbeReport probe(const ProcessSpec& process, const ProbeSpec& spec) {
  if (spec.replicas == 0) throw Error(ErrorCode::InvalidArgument, "probe needs at least one replica");
  if (spec.horizon < 100) throw Error(ErrorCode::InvalidArgument, "probe horizon must be at least 100");
  if (spec.horizon > spec.budget / spec.replicas) {
    throw Error(ErrorCode::BudgetExceeded, "horizon x replicas exceeds the probe budget of " +
                                               std::to_string(spec.budget) + " steps");
  }
  if (!process.innovation) throw Error(ErrorCode::InvalidArgument, "probe needs an innovation law");
  if (process.kind == ProcessKind::Frog) return probe_frog(process, spec);

  std::vector<double> b_grid = spec.b_grid.empty() ? default_b_grid(process) : spec.b_grid;
  for (double b : b_grid) {
    if (!(b > 0.0)) throw Error(ErrorCode::InvalidArgument, "probe thresholds must be positive");
  }
  if (!std::is_sorted(b_grid.begin(), b_grid.end())) {
    throw Error(ErrorCode::InvalidArgument, "probe thresholds must be sorted ascending");
  }

  const bool needs_ensemble = process.kind == ProcessKind::Ar || process.kind == ProcessKind::MaxAr ||
                              process.kind == ProcessKind::Branching;
  if (needs_ensemble && !process.ensemble) throw Error(ErrorCode::InvalidArgument, "probe needs an ensemble");
  if (process.kind == ProcessKind::Exchange && !process.t_law) {
    throw Error(ErrorCode::InvalidArgument, "exchange probe needs a T law");
  }
  if (process.kind == ProcessKind::CookieWalk && !process.omega_law) {
    throw Error(ErrorCode::InvalidArgument, "cookie walk probe needs an omega law");
  }
  const dist::InnovationLaw law =
      needs_ensemble ? process.innovation->lifted(process.ensemble->dim()) : *process.innovation;
  proc::CookieWalkConfig cookie_cfg;
  if (process.kind == ProcessKind::CookieWalk) {
    cookie_cfg.omega_law = *process.omega_law;
    cookie_cfg.cookie_law = law;
  }

  const std::vector<std::uint64_t> checkpoints = decade_checkpoints(spec.horizon);
  const std::uint64_t tail_start = spec.horizon / 10;
  std::vector<ReplicaResult> results(spec.replicas);
  const Stream root(spec.seed);

  parallel_for(spec.replicas, spec.workers, [&](std::size_t rep_index) {
    Stream rng = root.child(rep_index);
    std::unique_ptr<Stepper> chain;
    switch (process.kind) {
      case ProcessKind::Ar:
        chain = std::make_unique<LogArStepper>(*process.ensemble, law, false, rng);
        break;
      case ProcessKind::MaxAr:
        chain = std::make_unique<LogArStepper>(*process.ensemble, law, true, rng);
        break;
      case ProcessKind::Branching:
        chain = std::make_unique<BranchingStepper>(*process.ensemble, law, process.offspring, rng);
        break;
      case ProcessKind::Exchange:
        chain = std::make_unique<ExchangeStepper>(*process.t_law, law, rng);
        break;
      case ProcessKind::CookieWalk:
        chain = std::make_unique<CookieStepper>(cookie_cfg);
        break;
      case ProcessKind::Frog:
        break;
    }
    std::vector<double> thresholds(b_grid.size());
    for (std::size_t k = 0; k < b_grid.size(); ++k) {
      thresholds[k] = chain->log_scale() ? std::log(b_grid[k]) : b_grid[k];
    }
    ReplicaResult& res = results[rep_index];
    res.visits.assign(b_grid.size(), std::vector<std::uint64_t>(checkpoints.size(), 0));
    std::vector<std::uint64_t> running(b_grid.size(), 0);
    double tail_min = kInf;
    std::size_t next_cp = 0;
    for (std::uint64_t n = 0; n <= spec.horizon; ++n) {
      if (n > 0) chain->step(rng);
      const double level = chain->level();
      for (std::size_t k = 0; k < thresholds.size(); ++k) {
        if (level <= thresholds[k]) ++running[k];
      }
      if (n >= tail_start) tail_min = std::min(tail_min, level);
      while (next_cp < checkpoints.size() && checkpoints[next_cp] == n) {
        for (std::size_t k = 0; k < thresholds.size(); ++k) res.visits[k][next_cp] = running[k];
        ++next_cp;
      }
    }
    res.diverged = tail_min > thresholds.back();
    res.final_position = chain->position();
    res.overflow = chain->overflowed();
  });

  ProbeReport rep;
  rep.b_grid = b_grid;
  rep.checkpoints = checkpoints;
  rep.mean_visits.assign(b_grid.size(), 0.0);
  rep.mean_visits_curve.assign(checkpoints.size(), 0.0);
  std::size_t diverged = 0;
  const double r = static_cast<double>(spec.replicas);
  for (const ReplicaResult& res : results) {
    for (std::size_t k = 0; k < b_grid.size(); ++k) rep.mean_visits[k] += static_cast<double>(res.visits[k].back()) / r;
    for (std::size_t c = 0; c < checkpoints.size(); ++c) {
      rep.mean_visits_curve[c] += static_cast<double>(res.visits.back()[c]) / r;
    }
    if (res.diverged) ++diverged;
    if (res.overflow) ++rep.overflow_replicas;
    rep.mean_final_position += res.final_position / r;
    rep.visits.push_back(res.visits);
  }
  rep.divergence_fraction = static_cast<double>(diverged) / r;
  fit_growth(checkpoints, rep.mean_visits_curve, rep);

  if (rep.divergence_fraction >= kDivergenceThreshold) {
    rep.hint = Hint::TransientLike;
  } else if (rep.growth_slope > kSlopeThreshold && rep.growth_r2 > kR2Threshold) {
    rep.hint = Hint::RecurrentLike;
  } else {
    rep.hint = Hint::Ambiguous;
  }
  return rep;
}

AgreementRow agreement(cls::Outcome outcome, Hint hint) {
  AgreementRow row{cls::to_string(outcome), to_string(hint), AgreementStatus::Neutral};
  if (outcome == cls::Outcome::Inconclusive || hint == Hint::Ambiguous) return row;
  const bool recurrent = cls::is_recurrent(outcome);
  row.status = recurrent == (hint == Hint::RecurrentLike) ? AgreementStatus::Pass : AgreementStatus::Fail;
  return row;
}

AgreementRow cookie_agreement(cls::CookieOutcome outcome, const ProbeReport& report) {
  const double drift = report.mean_final_position;
  AgreementRow row{cls::to_string(outcome),
                   std::string(to_string(report.hint)) + (drift < 0.0 ? " (left)" : drift > 0.0 ? " (right)" : ""),
                   AgreementStatus::Neutral};
  if (outcome == cls::CookieOutcome::Inconclusive || report.hint == Hint::Ambiguous) return row;
  bool ok = false;
  switch (outcome) {
    case cls::CookieOutcome::TransientLeft:
      ok = report.hint == Hint::TransientLike && drift < 0.0;
      break;
    case cls::CookieOutcome::TransientRight:
      ok = report.hint == Hint::TransientLike && drift > 0.0;
      break;
    case cls::CookieOutcome::Recurrent:
      ok = report.hint == Hint::RecurrentLike;
      break;
    case cls::CookieOutcome::Inconclusive:
      break;
  }
  row.status = ok ? AgreementStatus::Pass : AgreementStatus::Fail;
  return row;
}

}  // namespace arrec::harness
