// Copyright 2026 The defect-lens Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DEFECT_LENS_H
#define DEFECT_LENS_H

/*
 * C interface to the defect-lens library.
 *
 * Every function returns a dl_status. On failure a description of the last
 * error on the calling thread is available from dl_last_error(). Reports are
 * opaque handles owned by the caller and released with dl_report_free().
 * Extended-real outputs use IEEE +infinity.
 */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(DL_BUILDING_LIBRARY)
#    define DL_API __declspec(dllexport)
#  else
#    define DL_API __declspec(dllimport)
#  endif
#else
#  define DL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dl_status {
  DL_OK = 0,
  DL_ERR_INVALID_ARGUMENT = 1,
  DL_ERR_DOMAIN = 2,
  DL_ERR_PARSE = 3,
  DL_ERR_IO = 4,
  DL_ERR_NUMERICAL = 5,
  DL_ERR_INTERNAL = 6
} dl_status;

typedef enum dl_outcome_mode { DL_OUTCOME_BINARY = 0, DL_OUTCOME_CONTINUOUS = 1 } dl_outcome_mode;
typedef enum dl_align_policy { DL_ALIGN_EXACT = 0, DL_ALIGN_NEAREST_PRECEDING = 1 } dl_align_policy;
typedef enum dl_sigma_method { DL_SIGMA_EXACT = 0, DL_SIGMA_PAPER = 1 } dl_sigma_method;
typedef enum dl_assist_direction {
  DL_ASSIST_INVERT_UPTAKE_MODEL = 0,
  DL_ASSIST_DIRECT_HESITANCY_MODEL = 1
} dl_assist_direction;
typedef enum dl_report_format { DL_FORMAT_JSON = 0, DL_FORMAT_CSV = 1, DL_FORMAT_BOTH = 2 } dl_report_format;

typedef struct dl_decomposition {
  double estimation_error;
  double ddc;
  double data_deficiency;
  double problem_difficulty;
  double n_eff_approx;
  double n_eff_exact;
  double sensitivity_factor;
} dl_decomposition;

typedef struct dl_report dl_report;

DL_API const char* dl_version(void);
DL_API const char* dl_last_error(void);
DL_API uint64_t dl_default_seed(void);

/* Scalar operations. A negative population_sd means "derive sqrt(p(1-p))". */
DL_API dl_status dl_decompose(int64_t sample_size, double sample_mean, int64_t population_size,
                              double population_mean, double population_sd, dl_decomposition* out);
DL_API dl_status dl_sensitivity_sweep(int64_t sample_size, double sample_mean, int64_t population_size,
                                      double population_mean, double population_sd, const double* factors,
                                      size_t n_factors, dl_decomposition* out);
DL_API dl_status dl_neff_approx(double ddc, int64_t sample_size, int64_t population_size, double* out);
DL_API dl_status dl_neff_exact(double ddc, int64_t sample_size, int64_t population_size, double* out);
DL_API dl_status dl_mse_srs(double n_eff, int64_t population_size, double sigma, double* out);
DL_API dl_status dl_subgroup_sigma(double p11, double p10, double p01, double p00, dl_sigma_method method,
                                   double* out);

/* Pipelines behind the CLI subcommands. Unused paths may be NULL; a NULL or
 * empty factor list selects the default sweep 0.9, 0.95, 1, 1.05, 1.1. */
typedef struct dl_decompose_options {
  const char* survey_path;
  const char* benchmark_path;
  const double* factors;
  size_t n_factors;
  dl_align_policy align;
  dl_outcome_mode mode;
} dl_decompose_options;

typedef struct dl_diff_options {
  const char* survey_path;
  const char* benchmark_path;
  int relative;
  int decomposed;
  const double* factors;
  size_t n_factors;
  dl_align_policy align;
  dl_outcome_mode mode;
  int64_t population_size; /* 0: previous wave's N */
} dl_diff_options;

typedef struct dl_subgroup_options {
  const char* survey_group1_path;
  const char* survey_group2_path;
  const char* benchmark_gap_path;
  double p11; /* negative: take p11 from the benchmark file */
  dl_sigma_method sigma;
  const double* factors;
  size_t n_factors;
} dl_subgroup_options;

typedef struct dl_assist_options {
  const char* target_path;
  const char* probability_survey_path;
  const char* benchmark_path;
  dl_assist_direction direction;
  const double* factors;
  size_t n_factors;
  int strict; /* non-converged fit returns DL_ERR_NUMERICAL; *out still receives the report */
} dl_assist_options;

typedef struct dl_changepoint_options {
  const char* series_path;
  int incident;
  double p0;
  double w0;
  int burn_in;
  int iterations;
  double threshold;
  int chains;
  uint64_t seed;
} dl_changepoint_options;

typedef struct dl_simulate_options {
  int64_t population_size;
  double prevalence;
  const char* mechanism; /* "srs:<n>", "logistic:<a>:<b>", "fixed:<i>,<j>,..." */
  int replicates;
  int mse_replicates;
  uint64_t seed;
  int has_subgroup;
  double group_mean;
  double p11;
} dl_simulate_options;

/* Fill option structs with defaults. */
DL_API void dl_decompose_options_init(dl_decompose_options* options);
DL_API void dl_diff_options_init(dl_diff_options* options);
DL_API void dl_subgroup_options_init(dl_subgroup_options* options);
DL_API void dl_assist_options_init(dl_assist_options* options);
DL_API void dl_changepoint_options_init(dl_changepoint_options* options);
DL_API void dl_simulate_options_init(dl_simulate_options* options);

DL_API dl_status dl_run_decompose(const dl_decompose_options* options, dl_report** out);
DL_API dl_status dl_run_diff(const dl_diff_options* options, dl_report** out);
DL_API dl_status dl_run_subgroup(const dl_subgroup_options* options, dl_report** out);
DL_API dl_status dl_run_assist(const dl_assist_options* options, dl_report** out);
DL_API dl_status dl_run_changepoint(const dl_changepoint_options* options, dl_report** out);
DL_API dl_status dl_run_simulate(const dl_simulate_options* options, dl_report** out);

/* JSON text, valid until the report is freed. */
DL_API const char* dl_report_json(const dl_report* report);
DL_API int dl_report_nonconverged(const dl_report* report);
DL_API dl_status dl_report_write(const dl_report* report, const char* directory, dl_report_format format);
DL_API void dl_report_free(dl_report* report);

#ifdef __cplusplus
}
#endif

#endif /* DEFECT_LENS_H */
