#include "arrec/arrec.h"

#include <cmath>
#include <exception>
#include <new>
#include <string>

#include "core/error.hpp"
#include "core/frog.hpp"
#include "core/matrix_env.hpp"
#include "core/report.hpp"
#include "core/selftest.hpp"

struct arrec_scenario {
  arrec::harness::Scenario scenario;
};

struct arrec_report {
  arrec::harness::RunOutput output;
};

namespace {

thread_local std::string last_error;

arrec_status status_of(arrec::ErrorCode code) {
  using arrec::ErrorCode;
  switch (code) {
    case ErrorCode::ConfigError:
      return ARREC_ERR_CONFIG;
    case ErrorCode::BudgetExceeded:
    case ErrorCode::SupportTooLarge:
    case ErrorCode::PopulationOverflow:
      return ARREC_ERR_BUDGET;
    case ErrorCode::InvalidArgument:
    case ErrorCode::DimensionMismatch:
      return ARREC_ERR_ARGUMENT;
    case ErrorCode::IoError:
      return ARREC_ERR_IO;
    case ErrorCode::InvariantViolation:
      return ARREC_ERR_INTERNAL;
    default:
      return ARREC_ERR_DOMAIN;
  }
}

template <typename Fn>
arrec_status guarded(Fn&& fn) {
  try {
    last_error.clear();
    fn();
    return ARREC_OK;
  } catch (const arrec::Error& e) {
    last_error = e.what();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return ARREC_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return ARREC_ERR_INTERNAL;
  } catch (...) {
    last_error = "unknown exception";
    return ARREC_ERR_INTERNAL;
  }
}

arrec_status null_argument(const char* what) {
  last_error = std::string("null argument: ") + what;
  return ARREC_ERR_ARGUMENT;
}

arrec::Matrix read_matrix(const double* data, size_t dim) {
  if (data == nullptr || dim == 0) throw arrec::Error(arrec::ErrorCode::InvalidArgument, "empty matrix");
  arrec::Matrix m(dim);
  for (size_t i = 0; i < dim; ++i) {
    for (size_t j = 0; j < dim; ++j) m(i, j) = data[i * dim + j];
  }
  return m;
}

template <typename Run>
arrec_status make_report(const arrec_scenario* scenario, arrec_report** out, Run&& run) {
  if (scenario == nullptr) return null_argument("scenario");
  if (out == nullptr) return null_argument("out");
  *out = nullptr;
  return guarded([&] { *out = new arrec_report{run(scenario->scenario)}; });
}

}  // namespace

extern "C" {

const char* arrec_version(void) { return arrec::harness::kVersion; }

const char* arrec_last_error(void) { return last_error.c_str(); }

arrec_status arrec_scenario_from_json(const char* json, arrec_scenario** out) {
  if (json == nullptr) return null_argument("json");
  if (out == nullptr) return null_argument("out");
  *out = nullptr;
  return guarded([&] { *out = new arrec_scenario{arrec::harness::parse_scenario_text(json)}; });
}

arrec_status arrec_scenario_from_file(const char* path, arrec_scenario** out) {
  if (path == nullptr) return null_argument("path");
  if (out == nullptr) return null_argument("out");
  *out = nullptr;
  return guarded([&] { *out = new arrec_scenario{arrec::harness::load_scenario(path)}; });
}

void arrec_scenario_free(arrec_scenario* scenario) { delete scenario; }

arrec_status arrec_classify(const arrec_scenario* scenario, arrec_report** out) {
  return make_report(scenario, out, [](const auto& sc) { return arrec::harness::run_classify(sc); });
}

arrec_status arrec_simulate(const arrec_scenario* scenario, uint64_t seed, arrec_report** out) {
  return make_report(scenario, out, [seed](const auto& sc) { return arrec::harness::run_simulate(sc, seed); });
}

arrec_status arrec_lyapunov(const arrec_scenario* scenario, arrec_report** out) {
  return make_report(scenario, out, [](const auto& sc) { return arrec::harness::run_lyapunov(sc); });
}

arrec_status arrec_validate(const arrec_scenario* scenario, arrec_report** out) {
  return make_report(scenario, out, [](const auto& sc) { return arrec::harness::run_validate(sc); });
}

arrec_status arrec_selftest(arrec_report** out) {
  if (out == nullptr) return null_argument("out");
  *out = nullptr;
  return guarded([&] {
    const auto results = arrec::selftest::run_all();
    auto* report = new arrec_report{};
    arrec::harness::Json j = arrec::selftest::results_json(results);
    j["command"] = "selftest";
    j["version"] = arrec::harness::kVersion;
    report->output.files.push_back({"report.json", arrec::harness::dump(j)});
    for (const auto& r : results) {
      if (!r.passed) report->output.passed = false;
    }
    *out = report;
  });
}

const char* arrec_report_json(const arrec_report* report) {
  if (report == nullptr || report->output.files.empty()) return nullptr;
  return report->output.report().c_str();
}

size_t arrec_report_file_count(const arrec_report* report) {
  return report == nullptr ? 0 : report->output.files.size();
}

const char* arrec_report_file_name(const arrec_report* report, size_t index) {
  if (report == nullptr || index >= report->output.files.size()) return nullptr;
  return report->output.files[index].name.c_str();
}

const char* arrec_report_file_data(const arrec_report* report, size_t index, size_t* size) {
  if (report == nullptr || index >= report->output.files.size()) return nullptr;
  const std::string& data = report->output.files[index].data;
  if (size != nullptr) *size = data.size();
  return data.c_str();
}

int arrec_report_passed(const arrec_report* report) {
  return report != nullptr && report->output.passed ? 1 : 0;
}

arrec_status arrec_report_write(const arrec_report* report, const char* dir) {
  if (report == nullptr) return null_argument("report");
  if (dir == nullptr) return null_argument("dir");
  return guarded([&] { arrec::harness::write_run_dir(dir, report->output); });
}

void arrec_report_free(arrec_report* report) { delete report; }

arrec_status arrec_spectral_radius(const double* matrix, size_t dim, double* rho) {
  if (rho == nullptr) return null_argument("rho");
  return guarded([&] { *rho = arrec::env::spectral_radius(read_matrix(matrix, dim)).rho; });
}

arrec_status arrec_variation_stats(const double* matrix, size_t dim, double* delta, double* big_delta, double* mu) {
  return guarded([&] {
    const auto stats = arrec::env::variation_stats(read_matrix(matrix, dim));
    if (delta != nullptr) *delta = stats.delta;
    if (mu != nullptr) *mu = stats.mu;
    if (big_delta != nullptr) *big_delta = stats.big_delta.value_or(NAN);
  });
}

arrec_status arrec_frog_rho(double p, double r, double* rho) {
  if (rho == nullptr) return null_argument("rho");
  return guarded([&] { *rho = arrec::proc::frog_rho(p, r); });
}

}  // extern "C"
