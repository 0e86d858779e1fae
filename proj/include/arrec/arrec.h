#ifndef ARREC_ARREC_H
#define ARREC_ARREC_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(ARREC_BUILDING_LIBRARY)
#    define ARREC_API __declspec(dllexport)
#  else
#    define ARREC_API __declspec(dllimport)
#  endif
#else
#  define ARREC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum arrec_status {
  ARREC_OK = 0,
  ARREC_ERR_CONFIG = 1,     /* scenario JSON failed to parse or validate */
  ARREC_ERR_DOMAIN = 2,     /* inputs outside the model's domain (zero anchor, critical rho, ...) */
  ARREC_ERR_BUDGET = 3,     /* enumeration, population or probe budget exceeded */
  ARREC_ERR_ARGUMENT = 4,   /* null pointer, index out of range, bad dimension */
  ARREC_ERR_IO = 5,
  ARREC_ERR_INTERNAL = 6    /* invariant violation or unexpected exception */
} arrec_status;

typedef struct arrec_scenario arrec_scenario;
typedef struct arrec_report arrec_report;

ARREC_API const char* arrec_version(void);

/* Message of the last failed call on this thread; empty string if none. */
ARREC_API const char* arrec_last_error(void);

ARREC_API arrec_status arrec_scenario_from_json(const char* json, arrec_scenario** out);
ARREC_API arrec_status arrec_scenario_from_file(const char* path, arrec_scenario** out);
ARREC_API void arrec_scenario_free(arrec_scenario* scenario);

/* Each run produces a report holding report.json, meta.json and any
   trajectory files. */
ARREC_API arrec_status arrec_classify(const arrec_scenario* scenario, arrec_report** out);
ARREC_API arrec_status arrec_simulate(const arrec_scenario* scenario, uint64_t seed, arrec_report** out);
ARREC_API arrec_status arrec_lyapunov(const arrec_scenario* scenario, arrec_report** out);
ARREC_API arrec_status arrec_validate(const arrec_scenario* scenario, arrec_report** out);
ARREC_API arrec_status arrec_selftest(arrec_report** out);

ARREC_API const char* arrec_report_json(const arrec_report* report);
ARREC_API size_t arrec_report_file_count(const arrec_report* report);
ARREC_API const char* arrec_report_file_name(const arrec_report* report, size_t index);
ARREC_API const char* arrec_report_file_data(const arrec_report* report, size_t index, size_t* size);
/* 1 when every check (agreement row, selftest suite) passed, else 0. */
ARREC_API int arrec_report_passed(const arrec_report* report);
ARREC_API arrec_status arrec_report_write(const arrec_report* report, const char* dir);
ARREC_API void arrec_report_free(arrec_report* report);

/* Row-major d x d matrix helpers. */
ARREC_API arrec_status arrec_spectral_radius(const double* matrix, size_t dim, double* rho);
ARREC_API arrec_status arrec_variation_stats(const double* matrix, size_t dim, double* delta, double* big_delta,
                                             double* mu);
ARREC_API arrec_status arrec_frog_rho(double p, double r, double* rho);

#ifdef __cplusplus
}
#endif

#endif
