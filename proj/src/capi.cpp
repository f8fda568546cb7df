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

#include "defect_lens/defect_lens.h"

#include <exception>
#include <new>
#include <string>

#include "defect_lens/decomp.hpp"
#include "defect_lens/error.hpp"
#include "defect_lens/estimands.hpp"
#include "defect_lens/pipeline.hpp"

using namespace defect_lens;

struct dl_report {
  Report report;
  std::string json;
};

namespace {

thread_local std::string g_last_error;

dl_status status_of(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument:
      return DL_ERR_INVALID_ARGUMENT;
    case ErrorKind::kDomain:
      return DL_ERR_DOMAIN;
    case ErrorKind::kParse:
      return DL_ERR_PARSE;
    case ErrorKind::kIo:
      return DL_ERR_IO;
    case ErrorKind::kNumerical:
      return DL_ERR_NUMERICAL;
  }
  return DL_ERR_INTERNAL;
}

template <typename F>
dl_status guarded(F&& body) {
  try {
    g_last_error.clear();
    return body();
  } catch (const Error& e) {
    g_last_error = e.what();
    return status_of(e.kind());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return DL_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return DL_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return DL_ERR_INTERNAL;
  }
}

void check_out(const void* out) { require(out != nullptr, "output pointer is NULL"); }

std::string path_arg(const char* path, const char* what) {
  require(path != nullptr && *path != '\0', std::string(what) + " path is required");
  return path;
}

std::vector<double> factor_arg(const double* factors, std::size_t n) {
  if (factors == nullptr || n == 0) return {};
  return {factors, factors + n};
}

BenchmarkPoint bench_arg(std::int64_t population_size, double population_mean, double population_sd) {
  return population_sd < 0.0 ? make_binary_benchmark(Date{}, population_size, population_mean)
                             : make_benchmark(Date{}, population_size, population_mean, population_sd);
}

dl_decomposition to_c(const Decomposition& d) {
  return {d.estimation_error, d.ddc, d.data_deficiency, d.problem_difficulty,
          d.n_eff_approx,     d.n_eff_exact, d.sensitivity_factor};
}

dl_status emit(Report report, dl_report** out) {
  auto* handle = new dl_report{std::move(report), {}};
  handle->json = handle->report.json_text();
  *out = handle;
  return DL_OK;
}

}  // namespace

extern "C" {

const char* dl_version(void) { return "1.0.0"; }

const char* dl_last_error(void) { return g_last_error.c_str(); }

uint64_t dl_default_seed(void) { return kDefaultSeed; }

dl_status dl_decompose(int64_t sample_size, double sample_mean, int64_t population_size, double population_mean,
                       double population_sd, dl_decomposition* out) {
  return guarded([&] {
    check_out(out);
    const SurveySnapshot s{Date{}, sample_size, sample_mean, ""};
    *out = to_c(decompose(s, bench_arg(population_size, population_mean, population_sd)));
    return DL_OK;
  });
}

dl_status dl_sensitivity_sweep(int64_t sample_size, double sample_mean, int64_t population_size,
                               double population_mean, double population_sd, const double* factors,
                               size_t n_factors, dl_decomposition* out) {
  return guarded([&] {
    check_out(out);
    require(factors != nullptr && n_factors > 0, "factor list is empty");
    const SurveySnapshot s{Date{}, sample_size, sample_mean, ""};
    const auto sweep = sensitivity_sweep(s, bench_arg(population_size, population_mean, population_sd),
                                         std::span<const double>(factors, n_factors));
    for (std::size_t i = 0; i < sweep.size(); ++i) out[i] = to_c(sweep[i]);
    return DL_OK;
  });
}

dl_status dl_neff_approx(double ddc, int64_t sample_size, int64_t population_size, double* out) {
  return guarded([&] {
    check_out(out);
    *out = effective_sample_size_approx(ddc, sample_size, population_size);
    return DL_OK;
  });
}

dl_status dl_neff_exact(double ddc, int64_t sample_size, int64_t population_size, double* out) {
  return guarded([&] {
    check_out(out);
    *out = effective_sample_size_exact(ddc, sample_size, population_size);
    return DL_OK;
  });
}

dl_status dl_mse_srs(double n_eff, int64_t population_size, double sigma, double* out) {
  return guarded([&] {
    check_out(out);
    *out = mse_srs(n_eff, population_size, sigma);
    return DL_OK;
  });
}

dl_status dl_subgroup_sigma(double p11, double p10, double p01, double p00, dl_sigma_method method, double* out) {
  return guarded([&] {
    check_out(out);
    SubgroupTable t;
    t.p11 = p11;
    t.p10 = p10;
    t.p01 = p01;
    t.p00 = p00;
    *out = subgroup_sigma(t, method == DL_SIGMA_PAPER ? SigmaMethod::kPaper : SigmaMethod::kExact);
    return DL_OK;
  });
}

void dl_decompose_options_init(dl_decompose_options* o) {
  if (o) *o = dl_decompose_options{nullptr, nullptr, nullptr, 0, DL_ALIGN_EXACT, DL_OUTCOME_BINARY};
}

void dl_diff_options_init(dl_diff_options* o) {
  if (o) *o = dl_diff_options{nullptr, nullptr, 0, 0, nullptr, 0, DL_ALIGN_EXACT, DL_OUTCOME_BINARY, 0};
}

void dl_subgroup_options_init(dl_subgroup_options* o) {
  if (o) *o = dl_subgroup_options{nullptr, nullptr, nullptr, -1.0, DL_SIGMA_EXACT, nullptr, 0};
}

void dl_assist_options_init(dl_assist_options* o) {
  if (o) *o = dl_assist_options{nullptr, nullptr, nullptr, DL_ASSIST_INVERT_UPTAKE_MODEL, nullptr, 0, 0};
}

void dl_changepoint_options_init(dl_changepoint_options* o) {
  if (!o) return;
  const ChangePointConfig c;
  *o = dl_changepoint_options{nullptr, 0, c.p0, c.w0, c.burn_in, c.iterations, c.threshold, c.chains, kDefaultSeed};
}

void dl_simulate_options_init(dl_simulate_options* o) {
  if (!o) return;
  const SimulateRun r;
  *o = dl_simulate_options{0, r.prevalence, nullptr, r.replicates, r.mse_replicates, kDefaultSeed, 0, 0.0, 0.0};
}

dl_status dl_run_decompose(const dl_decompose_options* o, dl_report** out) {
  return guarded([&] {
    check_out(out);
    require(o != nullptr, "options are NULL");
    DecomposeRun run;
    run.survey = path_arg(o->survey_path, "survey");
    run.benchmark = path_arg(o->benchmark_path, "benchmark");
    run.factors = factor_arg(o->factors, o->n_factors);
    run.policy = o->align == DL_ALIGN_NEAREST_PRECEDING ? AlignPolicy::kNearestPreceding : AlignPolicy::kExact;
    run.mode = o->mode == DL_OUTCOME_CONTINUOUS ? OutcomeMode::kContinuous : OutcomeMode::kBinary;
    return emit(run_decompose(run), out);
  });
}

dl_status dl_run_diff(const dl_diff_options* o, dl_report** out) {
  return guarded([&] {
    check_out(out);
    require(o != nullptr, "options are NULL");
    DiffRun run;
    run.survey = path_arg(o->survey_path, "survey");
    run.benchmark = path_arg(o->benchmark_path, "benchmark");
    run.relative = o->relative != 0;
    run.decomposed = o->decomposed != 0;
    run.factors = factor_arg(o->factors, o->n_factors);
    run.policy = o->align == DL_ALIGN_NEAREST_PRECEDING ? AlignPolicy::kNearestPreceding : AlignPolicy::kExact;
    run.mode = o->mode == DL_OUTCOME_CONTINUOUS ? OutcomeMode::kContinuous : OutcomeMode::kBinary;
    require(o->population_size >= 0, "population size must be non-negative");
    if (o->population_size > 0) run.population_size = o->population_size;
    return emit(run_diff(run), out);
  });
}

dl_status dl_run_subgroup(const dl_subgroup_options* o, dl_report** out) {
  return guarded([&] {
    check_out(out);
    require(o != nullptr, "options are NULL");
    SubgroupRun run;
    run.survey_group1 = path_arg(o->survey_group1_path, "group I survey");
    run.survey_group2 = path_arg(o->survey_group2_path, "group II survey");
    run.benchmark_gap = path_arg(o->benchmark_gap_path, "benchmark gap");
    if (o->p11 >= 0.0) run.p11 = o->p11;
    run.sigma = o->sigma == DL_SIGMA_PAPER ? SigmaMethod::kPaper : SigmaMethod::kExact;
    run.factors = factor_arg(o->factors, o->n_factors);
    return emit(run_subgroup(run), out);
  });
}

dl_status dl_run_assist(const dl_assist_options* o, dl_report** out) {
  return guarded([&] {
    check_out(out);
    require(o != nullptr, "options are NULL");
    AssistRun run;
    run.target = path_arg(o->target_path, "target survey");
    run.probability_survey = path_arg(o->probability_survey_path, "probability survey");
    run.benchmark = path_arg(o->benchmark_path, "benchmark");
    run.direction = o->direction == DL_ASSIST_DIRECT_HESITANCY_MODEL ? AssistDirection::kDirectHesitancyModel
                                                                      : AssistDirection::kInvertUptakeModel;
    run.factors = factor_arg(o->factors, o->n_factors);
    run.strict = o->strict != 0;
    Report report = run_assist(run);
    const bool failed = run.strict && report.nonconverged;
    emit(std::move(report), out);
    if (failed) {
      g_last_error = "beta regression did not converge";
      return DL_ERR_NUMERICAL;
    }
    return DL_OK;
  });
}

dl_status dl_run_changepoint(const dl_changepoint_options* o, dl_report** out) {
  return guarded([&] {
    check_out(out);
    require(o != nullptr, "options are NULL");
    ChangePointRun run;
    run.series = path_arg(o->series_path, "series");
    run.incident = o->incident != 0;
    run.config.p0 = o->p0;
    run.config.w0 = o->w0;
    run.config.burn_in = o->burn_in;
    run.config.iterations = o->iterations;
    run.config.threshold = o->threshold;
    run.config.chains = o->chains;
    run.config.seed = o->seed;
    return emit(run_changepoint(run), out);
  });
}

dl_status dl_run_simulate(const dl_simulate_options* o, dl_report** out) {
  return guarded([&] {
    check_out(out);
    require(o != nullptr, "options are NULL");
    SimulateRun run;
    run.population_size = o->population_size;
    run.prevalence = o->prevalence;
    run.mechanism = parse_mechanism(path_arg(o->mechanism, "mechanism"));
    run.replicates = o->replicates;
    run.mse_replicates = o->mse_replicates;
    run.seed = o->seed;
    if (o->has_subgroup) run.subgroup = SubgroupSpec{o->group_mean, o->p11};
    return emit(run_simulate(run), out);
  });
}

const char* dl_report_json(const dl_report* report) { return report ? report->json.c_str() : ""; }

int dl_report_nonconverged(const dl_report* report) { return report && report->report.nonconverged ? 1 : 0; }

dl_status dl_report_write(const dl_report* report, const char* directory, dl_report_format format) {
  return guarded([&] {
    require(report != nullptr, "report is NULL");
    const std::string dir = path_arg(directory, "output directory");
    const ReportFormat f = format == DL_FORMAT_CSV    ? ReportFormat::kCsv
                           : format == DL_FORMAT_BOTH ? ReportFormat::kBoth
                                                      : ReportFormat::kJson;
    write_report(report->report, dir, f);
    return DL_OK;
  });
}

void dl_report_free(dl_report* report) { delete report; }

}  // extern "C"
