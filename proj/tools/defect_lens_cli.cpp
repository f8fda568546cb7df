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

// defect-lens command-line interface. Talks to the library only through the
// C API in defect_lens.h.

#include <cerrno>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "defect_lens/defect_lens.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitNumerical = 2;

struct Global {
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string out = ".";
  std::string format = "both";
  bool binary = false;
  bool continuous = false;
  bool strict = false;
};

int report_error(dl_status status) {
  std::fprintf(stderr, "defect-lens: error: %s\n", dl_last_error());
  return status == DL_ERR_NUMERICAL ? kExitNumerical : kExitInput;
}

// Seed precedence: --seed, then DEFECT_LENS_SEED, then the library default.
bool resolve_seed(const Global& g, std::uint64_t* seed) {
  if (g.seed_given) {
    *seed = g.seed;
    return true;
  }
  const char* env = std::getenv("DEFECT_LENS_SEED");
  if (env == nullptr || *env == '\0') {
    *seed = dl_default_seed();
    return true;
  }
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(env, &end, 10);
  if (errno != 0 || *end != '\0' || *env == '-') {
    std::fprintf(stderr, "defect-lens: error: DEFECT_LENS_SEED is not an unsigned integer: %s\n", env);
    return false;
  }
  *seed = v;
  return true;
}

dl_report_format format_of(const std::string& f) {
  if (f == "json") return DL_FORMAT_JSON;
  if (f == "csv") return DL_FORMAT_CSV;
  return DL_FORMAT_BOTH;
}

// Writes the report and releases it. `status` is the run's own status, which
// may be a strict-mode failure that still produced a report.
int finish(const Global& g, dl_status status, dl_report* report) {
  if (report == nullptr) return report_error(status);
  // Writing resets the library's error text, so keep the run's message.
  const std::string run_error = dl_last_error();
  const dl_status written = dl_report_write(report, g.out.c_str(), format_of(g.format));
  dl_report_free(report);
  if (written != DL_OK) return report_error(written);
  if (status != DL_OK) {
    std::fprintf(stderr, "defect-lens: error: %s\n", run_error.c_str());
    return status == DL_ERR_NUMERICAL ? kExitNumerical : kExitInput;
  }
  return kExitOk;
}

dl_outcome_mode mode_of(const Global& g) { return g.continuous ? DL_OUTCOME_CONTINUOUS : DL_OUTCOME_BINARY; }

dl_align_policy align_of(const std::string& a) {
  return a == "nearest" ? DL_ALIGN_NEAREST_PRECEDING : DL_ALIGN_EXACT;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Selection-bias diagnostics for survey estimates against benchmark data", "defect-lens"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(dl_version()));

  Global g;
  app.add_option("--seed", g.seed, "Random seed (default: $DEFECT_LENS_SEED, else the built-in constant)")
      ->each([&](const std::string&) { g.seed_given = true; });
  app.add_option("--out", g.out, "Output directory")->capture_default_str();
  app.add_option("--format", g.format, "Report format")
      ->check(CLI::IsMember({"json", "csv", "both"}))
      ->capture_default_str();
  auto* bin = app.add_flag("--binary", g.binary, "Binary outcome (default)");
  auto* cont = app.add_flag("--continuous", g.continuous, "Continuous outcome; benchmarks need an sd column");
  bin->excludes(cont);
  app.add_flag("--strict", g.strict, "Treat non-converged fits as failures (exit 2)");
  app.fallthrough();

  std::vector<double> factors;
  std::string align = "exact";
  auto add_factors = [&](CLI::App* sub) {
    sub->add_option("--factors", factors, "Benchmark scale factors, comma separated")->delimiter(',');
  };
  auto add_align = [&](CLI::App* sub) {
    sub->add_option("--align", align, "Date join policy")
        ->check(CLI::IsMember({"exact", "nearest"}))
        ->capture_default_str();
  };

  // decompose
  std::string survey;
  std::string benchmark;
  auto* decompose = app.add_subcommand("decompose", "Error decomposition per date with a sensitivity sweep");
  decompose->add_option("--survey", survey, "Survey CSV (date,n,ybar)")->required();
  decompose->add_option("--benchmark", benchmark, "Benchmark CSV (date,N,count|ybar[,sd])")->required();
  add_factors(decompose);
  add_align(decompose);

  // diff
  bool relative = false;
  bool decomposed = false;
  std::int64_t population_size = 0;
  auto* diff = app.add_subcommand("diff", "Effective sample size of wave-to-wave differences");
  diff->add_option("--survey", survey, "Survey CSV (date,n,ybar)")->required();
  diff->add_option("--benchmark", benchmark, "Benchmark CSV")->required();
  diff->add_flag("--relative", relative, "Relative difference");
  diff->add_flag("--decomposed", decomposed, "Also evaluate through per-wave ddc");
  diff->add_option("--population-size", population_size, "Population size for the exact form")
      ->check(CLI::PositiveNumber);
  add_factors(diff);
  add_align(diff);

  // subgroup
  std::string survey_a;
  std::string survey_b;
  std::string benchmark_gap;
  double p11 = -1.0;
  std::string sigma = "exact";
  auto* subgroup = app.add_subcommand("subgroup", "Decomposition of a gap between two subgroups");
  subgroup->add_option("--survey-a", survey_a, "Group I survey CSV (date,n,ybar)")->required();
  subgroup->add_option("--survey-b", survey_b, "Group II survey CSV (date,n,ybar)")->required();
  subgroup->add_option("--benchmark-gap", benchmark_gap, "Benchmark CSV (date,N_I,N_II,ybar,gap[,p11])")
      ->required();
  subgroup->add_option("--p11", p11, "Share with outcome 1 in group II")->check(CLI::Range(0.0, 1.0));
  subgroup->add_option("--sigma", sigma, "SD of the contrast variable")
      ->check(CLI::IsMember({"exact", "paper"}))
      ->capture_default_str();
  add_factors(subgroup);

  // assist
  std::string target;
  std::string probability;
  std::string direction = "invert";
  auto* assist = app.add_subcommand("assist", "Model-assisted estimates from a beta regression");
  assist->add_option("--target", target, "Target survey CSV (date,a,b,n)")->required();
  assist->add_option("--probability-survey", probability, "Probability survey CSV (date,a,b,n)")->required();
  assist->add_option("--benchmark", benchmark, "Uptake benchmark CSV")->required();
  assist->add_option("--direction", direction, "invert: uptake on hesitancy, inverted; direct: hesitancy on uptake")
      ->check(CLI::IsMember({"invert", "direct"}))
      ->capture_default_str();
  add_factors(assist);

  // changepoint
  dl_changepoint_options cp;
  dl_changepoint_options_init(&cp);
  std::string series;
  bool incident = false;
  auto* changepoint = app.add_subcommand("changepoint", "Bayesian change-point probabilities");
  changepoint->add_option("--series", series, "Series CSV (date,value)")->required();
  changepoint->add_flag("--incident", incident, "Difference a cumulative series first");
  changepoint->add_option("--p0", cp.p0, "Prior bound on the change probability")->capture_default_str();
  changepoint->add_option("--w0", cp.w0, "Prior bound on the signal-to-noise ratio")->capture_default_str();
  changepoint->add_option("--iters", cp.iterations, "Sweeps including burn-in")->capture_default_str();
  changepoint->add_option("--burn", cp.burn_in, "Burn-in sweeps")->capture_default_str();
  changepoint->add_option("--threshold", cp.threshold, "Interval threshold")->capture_default_str();
  changepoint->add_option("--chains", cp.chains, "Independent chains")->capture_default_str();

  // simulate
  dl_simulate_options sim;
  dl_simulate_options_init(&sim);
  std::string mechanism;
  double group_mean = -1.0;
  double sim_p11 = -1.0;
  auto* simulate = app.add_subcommand("simulate", "Finite-population oracle runs");
  simulate->add_option("--n-pop", sim.population_size, "Population size")->required()->check(CLI::PositiveNumber);
  simulate->add_option("--prevalence", sim.prevalence, "Share with outcome 1")->required()->check(
      CLI::Range(0.0, 1.0));
  simulate->add_option("--mechanism", mechanism, "srs:n | logistic:alpha:beta | fixed:i,j,...")->required();
  simulate->add_option("--replicates", sim.replicates, "Selection replicates")->capture_default_str();
  simulate->add_option("--mse-replicates", sim.mse_replicates, "SRS draws for the Monte Carlo MSE")
      ->capture_default_str();
  auto* gm = simulate->add_option("--group-mean", group_mean, "Group II share")->check(CLI::Range(0.0, 1.0));
  auto* sp = simulate->add_option("--p11", sim_p11, "Share with outcome 1 in group II")->check(CLI::Range(0.0, 1.0));
  gm->needs(sp);
  sp->needs(gm);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  dl_report* report = nullptr;
  dl_status status = DL_OK;
  const double* factor_ptr = factors.empty() ? nullptr : factors.data();

  if (decompose->parsed()) {
    dl_decompose_options o;
    dl_decompose_options_init(&o);
    o.survey_path = survey.c_str();
    o.benchmark_path = benchmark.c_str();
    o.factors = factor_ptr;
    o.n_factors = factors.size();
    o.align = align_of(align);
    o.mode = mode_of(g);
    status = dl_run_decompose(&o, &report);
  } else if (diff->parsed()) {
    dl_diff_options o;
    dl_diff_options_init(&o);
    o.survey_path = survey.c_str();
    o.benchmark_path = benchmark.c_str();
    o.relative = relative;
    o.decomposed = decomposed;
    o.factors = factor_ptr;
    o.n_factors = factors.size();
    o.align = align_of(align);
    o.mode = mode_of(g);
    o.population_size = population_size;
    status = dl_run_diff(&o, &report);
  } else if (subgroup->parsed()) {
    dl_subgroup_options o;
    dl_subgroup_options_init(&o);
    o.survey_group1_path = survey_a.c_str();
    o.survey_group2_path = survey_b.c_str();
    o.benchmark_gap_path = benchmark_gap.c_str();
    o.p11 = p11;
    o.sigma = sigma == "paper" ? DL_SIGMA_PAPER : DL_SIGMA_EXACT;
    o.factors = factor_ptr;
    o.n_factors = factors.size();
    status = dl_run_subgroup(&o, &report);
  } else if (assist->parsed()) {
    dl_assist_options o;
    dl_assist_options_init(&o);
    o.target_path = target.c_str();
    o.probability_survey_path = probability.c_str();
    o.benchmark_path = benchmark.c_str();
    o.direction = direction == "direct" ? DL_ASSIST_DIRECT_HESITANCY_MODEL : DL_ASSIST_INVERT_UPTAKE_MODEL;
    o.factors = factor_ptr;
    o.n_factors = factors.size();
    o.strict = g.strict;
    status = dl_run_assist(&o, &report);
  } else if (changepoint->parsed()) {
    if (!resolve_seed(g, &cp.seed)) return kExitInput;
    cp.series_path = series.c_str();
    cp.incident = incident;
    status = dl_run_changepoint(&cp, &report);
  } else if (simulate->parsed()) {
    if (!resolve_seed(g, &sim.seed)) return kExitInput;
    sim.mechanism = mechanism.c_str();
    if (group_mean >= 0.0) {
      sim.has_subgroup = 1;
      sim.group_mean = group_mean;
      sim.p11 = sim_p11;
    }
    status = dl_run_simulate(&sim, &report);
  }
  return finish(g, status, report);
}
