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

#include "defect_lens/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>

#include "defect_lens/decomp.hpp"
#include "defect_lens/error.hpp"
#include "defect_lens/rng.hpp"

namespace defect_lens {

using nlohmann::ordered_json;

namespace {

const std::vector<std::string> kDecompHeader = {"estimation_error", "ddc",          "data_deficiency",
                                                "problem_difficulty", "n_eff_approx", "n_eff_exact"};

std::vector<std::string> decomp_cells(const Decomposition& d) {
  return {format_number(d.estimation_error), format_number(d.ddc),          format_number(d.data_deficiency),
          format_number(d.problem_difficulty), format_number(d.n_eff_approx), format_number(d.n_eff_exact)};
}

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

std::vector<double> resolve_factors(const std::vector<double>& factors) {
  return factors.empty() ? default_sensitivity_factors() : factors;
}

ordered_json sweep_block(std::span<const Decomposition> sweep) {
  ordered_json block = ordered_json::object();
  for (const auto& d : sweep) block[factor_key(d.sensitivity_factor)] = to_json(d);
  return block;
}

ordered_json range_json(const RangeSummary& r) {
  ordered_json o;
  put_extended(o, "median", r.median);
  put_extended(o, "min", r.min);
  put_extended(o, "max", r.max);
  return o;
}

ordered_json summary_json(std::span<const Decomposition> rows) {
  const DecompositionSummary s = summarize(rows);
  ordered_json o;
  o["count"] = rows.size();
  o["estimation_error"] = range_json(s.estimation_error);
  o["ddc"] = range_json(s.ddc);
  o["data_deficiency"] = range_json(s.data_deficiency);
  o["problem_difficulty"] = range_json(s.problem_difficulty);
  o["n_eff_approx"] = range_json(s.n_eff_approx);
  put_extended(o, "median_ddc_relative_gap", s.median_ddc_relative_gap);
  return o;
}

// Summaries of every factor across dates: sweeps[date][factor].
ordered_json factor_summaries(const std::vector<std::vector<Decomposition>>& sweeps, std::span<const double> factors) {
  ordered_json out = ordered_json::object();
  for (std::size_t f = 0; f < factors.size(); ++f) {
    std::vector<Decomposition> column;
    for (const auto& sweep : sweeps) column.push_back(sweep[f]);
    out[factor_key(factors[f])] = summary_json(column);
  }
  return out;
}

ordered_json factor_list(std::span<const double> factors) {
  ordered_json a = ordered_json::array();
  for (double f : factors) a.push_back(f);
  return a;
}

const char* policy_name(AlignPolicy p) { return p == AlignPolicy::kExact ? "exact" : "nearest_preceding"; }
const char* mode_name(OutcomeMode m) { return m == OutcomeMode::kBinary ? "binary" : "continuous"; }
const char* sigma_name(SigmaMethod m) { return m == SigmaMethod::kExact ? "exact" : "paper"; }

ordered_json dates_json(std::span<const Date> dates) {
  ordered_json a = ordered_json::array();
  for (const auto& d : dates) a.push_back(format_date(d));
  return a;
}

double parse_real(std::string_view text, const std::string& what) {
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || res.ec != std::errc{} || res.ptr != text.data() + text.size() || !std::isfinite(v)) {
    fail(ErrorKind::kInvalidArgument, what + ": not a number '" + std::string(text) + "'");
  }
  return v;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(sep, start);
    out.push_back(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

std::vector<double> parse_factor_list(std::string_view text) {
  std::vector<double> out;
  for (auto part : split(text, ',')) {
    const double f = parse_real(part, "factor list");
    require(f > 0.0, "factor list: factors must be positive");
    out.push_back(f);
  }
  return out;
}

SelectionMechanism parse_mechanism(std::string_view text) {
  const auto parts = split(text, ':');
  const std::string_view kind = parts.front();
  if (kind == "srs" && parts.size() == 2) {
    const double n = parse_real(parts[1], "srs mechanism");
    require(n >= 1.0 && n == std::floor(n), "srs mechanism: n must be a positive integer");
    return SrsSelection{static_cast<std::int64_t>(n)};
  }
  if (kind == "logistic" && parts.size() == 3) {
    return LogisticSelection{parse_real(parts[1], "logistic mechanism"), parse_real(parts[2], "logistic mechanism")};
  }
  if (kind == "fixed" && parts.size() == 2) {
    FixedSetSelection fixed;
    for (auto p : split(parts[1], ',')) {
      const double i = parse_real(p, "fixed mechanism");
      require(i >= 0.0 && i == std::floor(i), "fixed mechanism: indices must be non-negative integers");
      fixed.indices.push_back(static_cast<std::size_t>(i));
    }
    return fixed;
  }
  fail(ErrorKind::kInvalidArgument,
       "unknown mechanism '" + std::string(text) + "' (expected srs:n, logistic:alpha:beta or fixed:i,j,...)");
}

Report run_decompose(const DecomposeRun& run) {
  const auto survey = read_survey(run.survey, run.mode);
  const auto bench = read_benchmark(run.benchmark, run.mode);
  const auto factors = resolve_factors(run.factors);
  const Alignment alignment = align(survey, bench, run.policy);

  ordered_json config;
  config["survey"] = run.survey.string();
  config["benchmark"] = run.benchmark.string();
  config["factors"] = factor_list(factors);
  config["align"] = policy_name(run.policy);
  config["outcome"] = mode_name(run.mode);

  Report report;
  report.subcommand = "decompose";
  report.json = report_skeleton(report.subcommand, config);
  CsvTable table{"decompose", concat({"date", "benchmark_date", "factor"}, kDecompHeader), {}};

  ordered_json rows = ordered_json::array();
  std::vector<std::vector<Decomposition>> sweeps;
  for (const auto& pair : alignment.pairs) {
    const auto sweep = sensitivity_sweep(pair.survey, pair.bench, factors);
    ordered_json row;
    row["date"] = format_date(pair.survey.date);
    row["benchmark_date"] = format_date(pair.bench.date);
    row["n"] = pair.survey.sample_size;
    row["ybar_n"] = pair.survey.sample_mean;
    row["N"] = pair.bench.population_size;
    row["ybar_N"] = pair.bench.population_mean;
    row["sigma"] = pair.bench.population_sd;
    row["sweep"] = sweep_block(sweep);
    rows.push_back(std::move(row));
    for (const auto& d : sweep) {
      table.rows.push_back(concat({format_date(pair.survey.date), format_date(pair.bench.date),
                                   factor_key(d.sensitivity_factor)},
                                  decomp_cells(d)));
    }
    sweeps.push_back(sweep);
  }
  for (const auto& d : alignment.unmatched) {
    report.json["warnings"].push_back("survey date " + format_date(d) + " has no benchmark match");
  }
  report.json["results"]["dates"] = std::move(rows);
  report.json["results"]["unmatched"] = dates_json(alignment.unmatched);
  report.json["results"]["summary"] = factor_summaries(sweeps, factors);
  report.tables.push_back(std::move(table));
  return report;
}

Report run_diff(const DiffRun& run) {
  const auto survey = read_survey(run.survey, run.mode);
  const auto bench = read_benchmark(run.benchmark, run.mode);
  const auto factors = resolve_factors(run.factors);
  const Alignment alignment = align(survey, bench, run.policy);
  require(alignment.pairs.size() >= 2, "diff: need at least two matched waves");

  ordered_json config;
  config["survey"] = run.survey.string();
  config["benchmark"] = run.benchmark.string();
  config["relative"] = run.relative;
  config["decomposed"] = run.decomposed;
  config["factors"] = factor_list(factors);
  config["align"] = policy_name(run.policy);
  config["outcome"] = mode_name(run.mode);
  if (run.population_size) {
    config["population_size"] = *run.population_size;
  } else {
    config["population_size"] = "previous wave";
  }

  Report report;
  report.subcommand = "diff";
  report.json = report_skeleton(report.subcommand, config);
  const char* estimand = run.relative ? "relative_difference" : "difference";
  report.json["results"]["estimand"] = estimand;

  std::vector<std::string> header = {"date_prev", "date", "factor", "error", "n_eff", "n_eff_exact_form"};
  if (run.decomposed) header.push_back("n_eff_decomposed");
  header.push_back("level_n_eff_approx");
  header.push_back("gain");
  CsvTable table{"diff", header, {}};

  DiffOptions exact_form;
  exact_form.form = DiffForm::kExact;
  exact_form.population_size = run.population_size;

  ordered_json rows = ordered_json::array();
  std::map<std::size_t, std::vector<double>> gains_by_factor;
  for (std::size_t i = 1; i < alignment.pairs.size(); ++i) {
    const auto& a = alignment.pairs[i - 1];
    const auto& b = alignment.pairs[i];
    ordered_json row;
    row["date_prev"] = format_date(a.survey.date);
    row["date"] = format_date(b.survey.date);
    ordered_json block = ordered_json::object();
    for (std::size_t f = 0; f < factors.size(); ++f) {
      const double factor = factors[f];
      const WavePair pair{{a.survey, scale_benchmark(a.bench, factor)}, {b.survey, scale_benchmark(b.bench, factor)}};
      const Decomposition prev = decompose(pair.prev.survey, pair.prev.bench);
      const Decomposition curr = decompose(pair.curr.survey, pair.curr.bench);
      ordered_json entry;
      double error = 0.0;
      double neff = 0.0;
      double neff_exact = std::numeric_limits<double>::quiet_NaN();
      double neff_decomposed = 0.0;
      if (run.relative) {
        error = reldiff_error(pair);
        neff = reldiff_neff(pair);
        if (run.decomposed) {
          entry["error_decomposed"] = reldiff_error_decomposed(prev.ddc, curr.ddc, pair);
          neff_decomposed = reldiff_neff_decomposed(prev.ddc, curr.ddc, pair);
        }
      } else {
        error = diff_error(pair);
        neff = diff_neff(pair);
        neff_exact = diff_neff(pair, exact_form);
        if (run.decomposed) neff_decomposed = diff_neff_decomposed(prev.ddc, curr.ddc, pair);
      }
      entry["error"] = error;
      put_extended(entry, "n_eff", neff);
      put_extended(entry, "n_eff_exact_form", neff_exact);
      if (run.decomposed) {
        put_extended(entry, "n_eff_decomposed", neff_decomposed);
        entry["ddc_prev"] = prev.ddc;
        entry["ddc_curr"] = curr.ddc;
      }
      put_extended(entry, "level_n_eff_approx", curr.n_eff_approx);
      const double gain = neff / curr.n_eff_approx;
      put_extended(entry, "gain", gain);
      if (!std::isnan(gain)) gains_by_factor[f].push_back(gain);
      block[factor_key(factor)] = std::move(entry);

      std::vector<std::string> cells = {format_date(a.survey.date), format_date(b.survey.date), factor_key(factor),
                                        format_number(error), format_number(neff), format_number(neff_exact)};
      if (run.decomposed) cells.push_back(format_number(neff_decomposed));
      cells.push_back(format_number(curr.n_eff_approx));
      cells.push_back(format_number(gain));
      table.rows.push_back(std::move(cells));
    }
    row["sweep"] = std::move(block);
    rows.push_back(std::move(row));
  }
  ordered_json summary = ordered_json::object();
  for (std::size_t f = 0; f < factors.size(); ++f) {
    ordered_json s;
    if (gains_by_factor[f].empty()) {
      s["median_gain"] = nullptr;
      s["median_gain_reason"] = "no defined gains";
    } else {
      put_extended(s, "median_gain", summarize_range(gains_by_factor[f]).median);
    }
    summary[factor_key(factors[f])] = std::move(s);
  }
  for (const auto& d : alignment.unmatched) {
    report.json["warnings"].push_back("survey date " + format_date(d) + " has no benchmark match");
  }
  report.json["results"]["pairs"] = std::move(rows);
  report.json["results"]["unmatched"] = dates_json(alignment.unmatched);
  report.json["results"]["summary"] = std::move(summary);
  report.tables.push_back(std::move(table));
  return report;
}

Report run_subgroup(const SubgroupRun& run) {
  const auto group1 = read_survey(run.survey_group1, OutcomeMode::kBinary);
  const auto group2 = read_survey(run.survey_group2, OutcomeMode::kBinary);
  const auto bench = read_subgroup_benchmark(run.benchmark_gap);
  const auto factors = resolve_factors(run.factors);

  ordered_json config;
  config["survey_group1"] = run.survey_group1.string();
  config["survey_group2"] = run.survey_group2.string();
  config["benchmark_gap"] = run.benchmark_gap.string();
  if (run.p11) {
    config["p11"] = *run.p11;
  } else {
    config["p11"] = "from benchmark file";
  }
  config["sigma"] = sigma_name(run.sigma);
  config["factors"] = factor_list(factors);

  Report report;
  report.subcommand = "subgroup";
  report.json = report_skeleton(report.subcommand, config);
  CsvTable table{"subgroup",
                 concat({"date", "factor", "sigma_exact", "sigma_paper"}, kDecompHeader),
                 {}};

  std::vector<Date> d2;
  for (const auto& s : group2) d2.push_back(s.date);
  std::vector<Date> db;
  for (const auto& b : bench) db.push_back(b.date);

  ordered_json rows = ordered_json::array();
  std::vector<std::vector<Decomposition>> sweeps;
  std::vector<Date> unmatched;
  for (const auto& s1 : group1) {
    const std::ptrdiff_t j = latest_on_or_before(d2, s1.date);
    const std::ptrdiff_t k = latest_on_or_before(db, s1.date);
    if (j < 0 || k < 0 || d2[j] != s1.date || db[k] != s1.date) {
      unmatched.push_back(s1.date);
      continue;
    }
    const SurveySnapshot& s2 = group2[static_cast<std::size_t>(j)];
    const SubgroupBenchmark& b = bench[static_cast<std::size_t>(k)];
    const std::optional<double> p11 = run.p11 ? run.p11 : b.p11;
    if (!p11) fail(ErrorKind::kInvalidArgument, "subgroup: no p11 for " + format_date(s1.date) + " (use --p11 or a p11 column)");
    const double total = static_cast<double>(b.group_size_1 + b.group_size_2);
    const double gbar = static_cast<double>(b.group_size_2) / total;

    ordered_json row;
    row["date"] = format_date(s1.date);
    row["n_I"] = s1.sample_size;
    row["n_II"] = s2.sample_size;
    row["ybar_n_I"] = s1.sample_mean;
    row["ybar_n_II"] = s2.sample_mean;
    row["N_I"] = b.group_size_1;
    row["N_II"] = b.group_size_2;
    row["benchmark_gap"] = b.gap;
    row["p11"] = *p11;

    ordered_json block = ordered_json::object();
    std::vector<Decomposition> sweep;
    for (double factor : factors) {
      SubgroupTable t;
      try {
        t = make_subgroup_table(factor * b.outcome_mean, gbar, factor * *p11);
      } catch (const Error& e) {
        fail(e.kind(), "subgroup: factor " + factor_key(factor) + " on " + format_date(s1.date) + ": " + e.what());
      }
      t.group_size_1 = b.group_size_1;
      t.group_size_2 = b.group_size_2;
      t.sample_size_1 = s1.sample_size;
      t.sample_size_2 = s2.sample_size;
      t.sample_mean_1 = s1.sample_mean;
      t.sample_mean_2 = s2.sample_mean;
      const double sigma_exact = subgroup_sigma(t, SigmaMethod::kExact);
      double sigma_paper = std::numeric_limits<double>::quiet_NaN();
      std::string closed_form_problem;
      try {
        sigma_paper = subgroup_sigma(t, SigmaMethod::kPaper);
      } catch (const Error& e) {
        closed_form_problem = e.what();
      }
      Decomposition d = subgroup_decompose(t, factor * b.gap, run.sigma);
      d.sensitivity_factor = factor;
      ordered_json entry = to_json(d);
      entry["sigma_exact"] = sigma_exact;
      if (closed_form_problem.empty()) {
        entry["sigma_paper"] = sigma_paper;
      } else {
        entry["sigma_paper"] = nullptr;
        entry["sigma_paper_reason"] = closed_form_problem;
      }
      block[factor_key(factor)] = std::move(entry);
      table.rows.push_back(concat({format_date(s1.date), factor_key(factor), format_number(sigma_exact),
                                   format_number(sigma_paper)},
                                  decomp_cells(d)));
      sweep.push_back(d);
    }
    row["sweep"] = std::move(block);
    rows.push_back(std::move(row));
    sweeps.push_back(std::move(sweep));
  }
  if (rows.empty()) fail(ErrorKind::kInvalidArgument, "subgroup: empty date intersection");
  for (const auto& d : unmatched) {
    report.json["warnings"].push_back("group I date " + format_date(d) + " has no group II or benchmark match");
  }
  report.json["results"]["dates"] = std::move(rows);
  report.json["results"]["unmatched"] = dates_json(unmatched);
  report.json["results"]["summary"] = factor_summaries(sweeps, factors);
  report.tables.push_back(std::move(table));
  return report;
}

Report run_assist(const AssistRun& run) {
  const PairedSeries target = read_paired(run.target);
  const PairedSeries probability = read_paired(run.probability_survey);
  const auto bench = read_benchmark(run.benchmark, OutcomeMode::kBinary);
  AssistOptions options;
  options.direction = run.direction;
  options.factors = resolve_factors(run.factors);
  const AssistResult result = assisted_series(target, probability, bench, options);

  ordered_json config;
  config["target"] = run.target.string();
  config["probability_survey"] = run.probability_survey.string();
  config["benchmark"] = run.benchmark.string();
  config["direction"] = run.direction == AssistDirection::kInvertUptakeModel ? "invert_uptake_model"
                                                                              : "direct_hesitancy_model";
  config["factors"] = factor_list(result.factors);
  config["max_iterations"] = options.fit.max_iterations;
  config["gradient_tolerance"] = options.fit.gradient_tolerance;
  config["strict"] = run.strict;

  Report report;
  report.subcommand = "assist";
  report.json = report_skeleton(report.subcommand, config);
  report.nonconverged = !result.fit.converged;

  const BetaFit& fit = result.fit;
  ordered_json fj;
  fj["beta0"] = fit.beta0;
  fj["beta1"] = fit.beta1;
  fj["phi"] = fit.phi;
  fj["loglik"] = fit.loglik;
  fj["converged"] = fit.converged;
  fj["iterations"] = fit.iterations;
  fj["gradient_norm"] = fit.gradient_norm;
  put_extended(fj, "pseudo_r2", fit.pseudo_r2);
  fj["intercept_only"] = fit.intercept_only;
  ordered_json se;
  put_extended(se, "beta0", fit.std_errors[0]);
  put_extended(se, "beta1", fit.std_errors[1]);
  put_extended(se, "phi", fit.std_errors[2]);
  fj["std_errors"] = std::move(se);
  report.json["results"]["fit"] = std::move(fj);
  if (!fit.converged) report.json["warnings"].push_back("beta regression did not converge");
  for (const auto& w : result.warnings) report.json["warnings"].push_back(w);

  CsvTable table{"assist", concat({"date", "factor", "series", "estimate"}, kDecompHeader), {}};
  ordered_json rows = ordered_json::array();
  std::vector<std::vector<Decomposition>> orig_sweeps;
  std::vector<std::vector<Decomposition>> assisted_sweeps;
  for (const auto& r : result.rows) {
    ordered_json row;
    row["date"] = format_date(r.date);
    row["probability_wave"] = format_date(r.probability_wave);
    row["benchmark_date"] = format_date(r.benchmark_date);
    row["benchmark_uptake"] = r.benchmark_uptake;
    row["predicted_hesitancy"] = r.predicted_hesitancy;
    row["original_estimate"] = r.original_estimate;
    row["assisted_estimate"] = r.assisted_estimate;
    row["reference_estimate"] = r.reference_estimate;
    row["original"] = sweep_block(r.original);
    row["assisted"] = sweep_block(r.assisted);
    rows.push_back(std::move(row));
    for (std::size_t f = 0; f < result.factors.size(); ++f) {
      const std::string key = factor_key(result.factors[f]);
      table.rows.push_back(concat({format_date(r.date), key, "original", format_number(r.original_estimate)},
                                  decomp_cells(r.original[f])));
      table.rows.push_back(concat({format_date(r.date), key, "assisted", format_number(r.assisted_estimate)},
                                  decomp_cells(r.assisted[f])));
    }
    orig_sweeps.push_back(r.original);
    assisted_sweeps.push_back(r.assisted);
  }
  for (const auto& d : result.unmatched_dates) {
    report.json["warnings"].push_back("target date " + format_date(d) + " has no earlier probability wave or benchmark");
  }
  report.json["results"]["dates"] = std::move(rows);
  report.json["results"]["unmatched"] = dates_json(result.unmatched_dates);
  report.json["results"]["summary"]["original"] = factor_summaries(orig_sweeps, result.factors);
  report.json["results"]["summary"]["assisted"] = factor_summaries(assisted_sweeps, result.factors);
  report.tables.push_back(std::move(table));
  return report;
}

Report run_changepoint(const ChangePointRun& run) {
  auto series = read_values(run.series);
  std::vector<std::string> warnings;
  if (run.incident) {
    IncidentPoints inc = to_incident(series);
    series = std::move(inc.points);
    warnings = std::move(inc.warnings);
  }
  const ChangePointResult result = bcp_posterior(series, run.config);

  const ChangePointConfig defaults;
  ordered_json config;
  config["series"] = run.series.string();
  config["incident"] = run.incident;
  config["p0"] = run.config.p0;
  config["w0"] = run.config.w0;
  config["burn_in"] = run.config.burn_in;
  config["iterations"] = run.config.iterations;
  config["threshold"] = run.config.threshold;
  config["chains"] = run.config.chains;
  config["seed"] = run.config.seed;
  // Tuning values left at their defaults are listed so result-level
  // discrepancies can be traced to them.
  ordered_json defaulted = ordered_json::array();
  if (run.config.p0 == defaults.p0) defaulted.push_back("p0");
  if (run.config.w0 == defaults.w0) defaulted.push_back("w0");
  if (run.config.burn_in == defaults.burn_in) defaulted.push_back("burn_in");
  if (run.config.iterations == defaults.iterations) defaulted.push_back("iterations");
  config["defaulted"] = std::move(defaulted);

  Report report;
  report.subcommand = "changepoint";
  report.json = report_skeleton(report.subcommand, config);
  for (const auto& w : warnings) report.json["warnings"].push_back(w);

  CsvTable points{"changepoint", {"date", "value", "probability", "posterior_mean"}, {}};
  ordered_json pj = ordered_json::array();
  for (std::size_t i = 0; i < series.size(); ++i) {
    ordered_json p;
    p["date"] = format_date(series[i].date);
    p["value"] = series[i].value;
    p["probability"] = result.probabilities[i];
    p["posterior_mean"] = result.posterior_means[i];
    pj.push_back(std::move(p));
    points.rows.push_back({format_date(series[i].date), format_number(series[i].value),
                           format_number(result.probabilities[i]), format_number(result.posterior_means[i])});
  }
  CsvTable intervals{"changepoint_intervals", {"start", "end"}, {}};
  ordered_json ij = ordered_json::array();
  for (const auto& iv : result.intervals) {
    ij.push_back({{"start", format_date(iv.start)}, {"end", format_date(iv.end)}});
    intervals.rows.push_back({format_date(iv.start), format_date(iv.end)});
  }
  report.json["results"]["points"] = std::move(pj);
  report.json["results"]["intervals"] = std::move(ij);
  report.tables.push_back(std::move(points));
  report.tables.push_back(std::move(intervals));
  return report;
}

Report run_simulate(const SimulateRun& run) {
  require(run.replicates >= 1, "simulate: at least one replicate");
  require(run.mse_replicates >= 1, "simulate: at least one Monte Carlo replicate");
  const FinitePopulation pop =
      generate_population(run.population_size, run.prevalence, run.subgroup, derive_seed(run.seed, 0));
  const BenchmarkPoint bench = population_benchmark(pop);

  ordered_json config;
  config["population_size"] = run.population_size;
  config["prevalence"] = run.prevalence;
  if (const auto* s = std::get_if<SrsSelection>(&run.mechanism)) {
    config["mechanism"] = {{"kind", "srs"}, {"n", s->n}};
  } else if (const auto* l = std::get_if<LogisticSelection>(&run.mechanism)) {
    config["mechanism"] = {{"kind", "logistic"}, {"alpha", l->alpha}, {"beta", l->beta}};
  } else {
    ordered_json idx = ordered_json::array();
    for (auto i : std::get<FixedSetSelection>(run.mechanism).indices) idx.push_back(i);
    config["mechanism"] = {{"kind", "fixed"}, {"indices", idx}};
  }
  config["replicates"] = run.replicates;
  config["mse_replicates"] = run.mse_replicates;
  config["seed"] = run.seed;
  if (run.subgroup) config["subgroup"] = {{"group_mean", run.subgroup->group_mean}, {"p11", run.subgroup->p11}};

  Report report;
  report.subcommand = "simulate";
  report.json = report_skeleton(report.subcommand, config);
  CsvTable table{"simulate", {"replicate", "n", "ybar_n", "ddc", "plugin_ddc", "identity_residual"}, {}};
  if (run.subgroup) {
    table.header.push_back("subgroup_ddc");
    table.header.push_back("subgroup_identity_residual");
  }

  std::vector<double> ddcs;
  double max_residual = 0.0;
  double max_subgroup_residual = 0.0;
  ordered_json first;
  for (int r = 0; r < run.replicates; ++r) {
    const FinitePopulation sample = apply_selection(pop, run.mechanism, derive_seed(run.seed, static_cast<std::uint64_t>(r) + 1));
    const SurveySnapshot snap = recorded_snapshot(sample);
    const double ddc = exact_ddc(sample);
    const double residual = verify_identity(sample);
    const Decomposition d = decompose(snap, bench);
    ddcs.push_back(ddc);
    max_residual = std::max(max_residual, std::fabs(residual));
    std::vector<std::string> cells = {std::to_string(r), std::to_string(snap.sample_size),
                                      format_number(snap.sample_mean), format_number(ddc), format_number(d.ddc),
                                      format_number(residual)};
    if (run.subgroup) {
      const double sub_residual = verify_subgroup_identity(sample);
      max_subgroup_residual = std::max(max_subgroup_residual, std::fabs(sub_residual));
      cells.push_back(format_number(exact_subgroup_ddc(sample)));
      cells.push_back(format_number(sub_residual));
    }
    table.rows.push_back(std::move(cells));

    if (r == 0) {
      // Monte Carlo check of the n_eff meaning on the first replicate.
      first["n"] = snap.sample_size;
      first["squared_error"] = d.estimation_error * d.estimation_error;
      first["decomposition"] = to_json(d);
      const double n_eff = d.n_eff_exact;
      if (std::isfinite(n_eff)) {
        const auto n_srs = std::clamp<std::int64_t>(std::llround(n_eff), 1, run.population_size);
        first["srs_n"] = n_srs;
        first["mc_mse_srs"] = mc_mse_srs(pop, n_srs, run.mse_replicates, derive_seed(run.seed, 1ULL << 32));
        first["mse_srs"] = mse_srs(static_cast<double>(n_srs), run.population_size, bench.population_sd);
      } else {
        first["srs_n"] = nullptr;
        first["srs_n_reason"] = "infinite effective sample size";
      }
    }
  }

  const RangeSummary range = summarize_range(ddcs);
  double mean = 0.0;
  for (double v : ddcs) mean += v;
  mean /= static_cast<double>(ddcs.size());
  double var = 0.0;
  for (double v : ddcs) var += (v - mean) * (v - mean);
  ordered_json summary;
  summary["mean_ddc"] = mean;
  if (ddcs.size() > 1) {
    var /= static_cast<double>(ddcs.size() - 1);
    const double se = std::sqrt(var / static_cast<double>(ddcs.size()));
    summary["se_mean_ddc"] = se;
    summary["mean_within_3se_of_zero"] = std::fabs(mean) <= 3.0 * se;
  }
  summary["median_ddc"] = range.median;
  summary["min_ddc"] = range.min;
  summary["max_ddc"] = range.max;
  summary["max_abs_identity_residual"] = max_residual;
  if (run.subgroup) summary["max_abs_subgroup_identity_residual"] = max_subgroup_residual;

  report.json["results"]["population"] = {{"N", bench.population_size},
                                          {"mean", bench.population_mean},
                                          {"sd", bench.population_sd}};
  report.json["results"]["first_replicate"] = std::move(first);
  report.json["results"]["summary"] = std::move(summary);
  report.tables.push_back(std::move(table));
  return report;
}

}  // namespace defect_lens
