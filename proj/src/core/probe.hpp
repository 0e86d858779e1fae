#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "core/classify.hpp"
#include "core/dist.hpp"
#include "core/matrix_env.hpp"
#include "core/processes.hpp"

namespace arrec::harness {

enum class ProcessKind { Ar, MaxAr, Branching, Exchange, Frog, CookieWalk };
const char* to_string(ProcessKind k) noexcept;

struct ProcessSpec {
  ProcessKind kind = ProcessKind::Ar;
  std::optional<env::MatrixEnsemble> ensemble;        // ar, max_ar, branching
  std::optional<dist::InnovationLaw> innovation;      // Y, W, sleep law or cookie law
  std::optional<dist::InnovationLaw> t_law;           // exchange decrements
  std::optional<dist::InnovationLaw> omega_law;       // cookie walk environment
  proc::OffspringFamily offspring = proc::OffspringFamily::Poisson;
  double frog_p = 0.9;
  double frog_r = 0.5;
  std::uint64_t site_cap = 1'000'000;
  std::uint64_t wake_cap = 100'000;
};

enum class Hint { RecurrentLike, TransientLike, Ambiguous };
const char* to_string(Hint h) noexcept;

inline constexpr std::uint64_t kDefaultProbeBudget = 2'000'000'000;

struct ProbeSpec {
  std::vector<double> b_grid;  // empty: default grid
  std::uint64_t horizon = 100'000;
  std::size_t replicas = 200;
  std::uint64_t seed = 1;
  unsigned workers = 0;
  std::uint64_t budget = kDefaultProbeBudget;  // cap on horizon * replicas
};

struct ProbeReport {
  std::vector<double> b_grid;
  std::vector<std::uint64_t> checkpoints;                       // 10, 100, ..., horizon
  std::vector<std::vector<std::vector<std::uint64_t>>> visits;  // [replica][b][checkpoint]
  std::vector<double> mean_visits;                              // per b, at the horizon
  std::vector<double> mean_visits_curve;                        // largest b, per checkpoint
  double divergence_fraction = 0.0;
  double growth_slope = 0.0;
  double growth_r2 = 0.0;
  double mean_final_position = 0.0;  // signed; cookie walk only
  std::size_t overflow_replicas = 0; // branching runs that hit the population cap
  // Frog runs.
  std::size_t runs = 0;
  double untruncated_fraction = 0.0;
  double mean_woken = 0.0;
  Hint hint = Hint::Ambiguous;
};

inline constexpr double kSlopeThreshold = 0.2;
inline constexpr double kR2Threshold = 0.5;
inline constexpr double kDivergenceThreshold = 0.99;

/// Default thresholds {1, 10, 100} scaled by the innovation median (or by 1
/// when the median is 0 or the process is a cookie walk).
std::vector<double> default_b_grid(const ProcessSpec& process);

/// Throws BudgetExceeded if horizon * replicas exceeds the budget.
ProbeReport probe(const ProcessSpec& process, const ProbeSpec& spec);

enum class AgreementStatus { Pass, Fail, Neutral };
const char* to_string(AgreementStatus s) noexcept;

struct AgreementRow {
  std::string classifier;  // outcome name
  std::string probe;       // hint name (with drift for cookie walks)
  AgreementStatus status = AgreementStatus::Neutral;
};

AgreementRow agreement(cls::Outcome outcome, Hint hint);
AgreementRow cookie_agreement(cls::CookieOutcome outcome, const ProbeReport& report);

}  // namespace arrec::harness
