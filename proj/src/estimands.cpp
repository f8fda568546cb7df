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

#include "defect_lens/estimands.hpp"

#include <algorithm>
#include <cmath>

#include "defect_lens/decomp.hpp"
#include "defect_lens/error.hpp"

namespace defect_lens {

namespace {

double wave_error_term(double ddc, const Wave& w) {
  return ddc * data_deficiency(w.survey.sample_size, w.bench.population_size) * w.bench.population_sd;
}

double variance_sum(const WavePair& pair) {
  const double a = pair.prev.bench.population_sd;
  const double b = pair.curr.bench.population_sd;
  return a * a + b * b;
}

double ratio_or_infinity(double numerator, double error) {
  if (error == 0.0) return kInfinity;
  return numerator / (error * error);
}

void check_relative(const WavePair& pair) {
  if (!(pair.prev.bench.population_mean > 0.0) || !(pair.prev.survey.sample_mean > 0.0)) {
    fail(ErrorKind::kDomain, "relative difference undefined: previous-wave mean is zero");
  }
}

// (Y_t / Y_{t-1})^2 * (s2_{t-1} / Y_{t-1}^2 + s2_t / Y_t^2), written without
// dividing by Y_t.
double reldiff_numerator(const WavePair& pair) {
  const double y_prev = pair.prev.bench.population_mean;
  const double y_curr = pair.curr.bench.population_mean;
  const double s_prev = pair.prev.bench.population_sd;
  const double s_curr = pair.curr.bench.population_sd;
  return (y_curr * y_curr * s_prev * s_prev / (y_prev * y_prev) + s_curr * s_curr) / (y_prev * y_prev);
}

}  // namespace

void validate(const WavePair& pair) {
  require(pair.prev.survey.date < pair.curr.survey.date, "wave pair: previous wave must precede current wave");
  for (const Wave* w : {&pair.prev, &pair.curr}) {
    require(w->bench.population_sd > 0.0, "wave pair: benchmark SD must be positive");
    require(w->survey.sample_size >= 1 && w->survey.sample_size < w->bench.population_size,
            "wave pair: requires 1 <= n < N at each wave");
  }
}

double diff_error(const WavePair& pair) {
  const double survey_change = pair.curr.survey.sample_mean - pair.prev.survey.sample_mean;
  const double bench_change = pair.curr.bench.population_mean - pair.prev.bench.population_mean;
  return survey_change - bench_change;
}

double diff_neff(const WavePair& pair, const DiffOptions& options) {
  validate(pair);
  const double s = variance_sum(pair);
  const double error = diff_error(pair);
  if (error == 0.0) return kInfinity;
  if (options.form == DiffForm::kApprox) return s / (error * error);

  const std::int64_t population = options.population_size.value_or(pair.prev.bench.population_size);
  require(population >= 2, "diff_neff: population size must be at least 2");
  const double big_n = static_cast<double>(population);
  return (s * big_n / (big_n - 1.0)) / (s / (big_n - 1.0) + error * error);
}

double diff_neff_decomposed(double ddc_prev, double ddc_curr, const WavePair& pair) {
  validate(pair);
  const double error = wave_error_term(ddc_curr, pair.curr) - wave_error_term(ddc_prev, pair.prev);
  return ratio_or_infinity(variance_sum(pair), error);
}

double reldiff_error(const WavePair& pair) {
  check_relative(pair);
  const double survey_rel = (pair.curr.survey.sample_mean - pair.prev.survey.sample_mean) /
                            pair.prev.survey.sample_mean;
  const double bench_rel = (pair.curr.bench.population_mean - pair.prev.bench.population_mean) /
                           pair.prev.bench.population_mean;
  return survey_rel - bench_rel;
}

double reldiff_error_decomposed(double ddc_prev, double ddc_curr, const WavePair& pair) {
  check_relative(pair);
  const double y_prev = pair.prev.bench.population_mean;
  const double y_curr = pair.curr.bench.population_mean;
  const double e_prev = wave_error_term(ddc_prev, pair.prev);
  const double e_curr = wave_error_term(ddc_curr, pair.curr);
  const double first_order = e_curr / y_prev - y_curr * e_prev / (y_prev * y_prev);
  return first_order * (1.0 - e_prev / y_prev);
}

double reldiff_neff(const WavePair& pair) {
  validate(pair);
  return ratio_or_infinity(reldiff_numerator(pair), reldiff_error(pair));
}

double reldiff_neff_decomposed(double ddc_prev, double ddc_curr, const WavePair& pair) {
  validate(pair);
  return ratio_or_infinity(reldiff_numerator(pair), reldiff_error_decomposed(ddc_prev, ddc_curr, pair));
}

SubgroupTable make_subgroup_table(double outcome_mean, double group_mean, double p11) {
  require(outcome_mean >= 0.0 && outcome_mean <= 1.0, "subgroup table: outcome mean must lie in [0, 1]");
  require(group_mean >= 0.0 && group_mean <= 1.0, "subgroup table: group mean must lie in [0, 1]");
  const double upper = std::min(outcome_mean, group_mean);
  const double lower = std::max(0.0, outcome_mean + group_mean - 1.0);
  constexpr double kSlack = 1e-12;
  if (p11 > upper + kSlack) {
    fail(ErrorKind::kInvalidArgument, "subgroup table: p11 exceeds the Frechet upper bound min(Ybar, Gbar)");
  }
  if (p11 < lower - kSlack) {
    fail(ErrorKind::kInvalidArgument,
         "subgroup table: p11 below the Frechet lower bound max(0, Ybar + Gbar - 1)");
  }
  SubgroupTable t;
  t.p11 = p11;
  t.p10 = std::max(0.0, outcome_mean - p11);
  t.p01 = std::max(0.0, group_mean - p11);
  t.p00 = std::max(0.0, 1.0 - outcome_mean - group_mean + p11);
  return t;
}

void validate(const SubgroupTable& t) {
  for (double p : {t.p11, t.p10, t.p01, t.p00}) require(p >= 0.0, "subgroup table: negative cell");
  require(std::abs(t.p11 + t.p10 + t.p01 + t.p00 - 1.0) <= 1e-12, "subgroup table: cells must sum to 1");
  require(t.group_size_1 >= 1 && t.group_size_2 >= 1, "subgroup table: group sizes must be positive");
  require(t.sample_size_1 >= 1 && t.sample_size_2 >= 1, "subgroup table: sample sizes must be positive");
}

double subgroup_sigma(const SubgroupTable& t, SigmaMethod method) {
  for (double p : {t.p11, t.p10, t.p01, t.p00}) require(p >= 0.0, "subgroup table: negative cell");
  require(std::abs(t.p11 + t.p10 + t.p01 + t.p00 - 1.0) <= 1e-12, "subgroup table: cells must sum to 1");
  if (method == SigmaMethod::kExact) {
    // Y* takes 1 on (Y=1,G=1), -1 on (Y=1,G=0), 0 otherwise: E[Y*^2] = P(Y=1).
    const double mean = t.p11 - t.p10;
    const double variance = std::max(0.0, (t.p11 + t.p10) - mean * mean);
    return std::sqrt(variance);
  }
  const double y = t.outcome_mean();
  const double g = t.group_mean();
  const double variance = y * (1.0 - y) + 4.0 * g * (1.0 - g) + 4.0 * (t.p11 - y * g);
  if (variance < 0.0) fail(ErrorKind::kDomain, "closed-form variance negative");
  return std::sqrt(variance);
}

Decomposition subgroup_decompose(const SubgroupTable& table, double bench_gap, SigmaMethod method) {
  validate(table);
  const std::int64_t n = table.sample_size_1 + table.sample_size_2;
  const std::int64_t big_n = table.group_size_1 + table.group_size_2;
  if (n == big_n) fail(ErrorKind::kDomain, "census: deficiency zero");
  require(n < big_n, "subgroup_decompose: pooled sample size exceeds pooled population size");
  const double sigma = subgroup_sigma(table, method);
  if (!(sigma > 0.0)) fail(ErrorKind::kDomain, "degenerate subgroup table: SD of Y* is zero");

  Decomposition d;
  d.estimation_error = (table.sample_mean_2 - table.sample_mean_1) - bench_gap;
  d.data_deficiency = data_deficiency(n, big_n);
  d.problem_difficulty = sigma;
  d.ddc = d.estimation_error / (d.data_deficiency * sigma);
  d.n_eff_approx = effective_sample_size_approx(d.ddc, n, big_n);
  d.n_eff_exact = effective_sample_size_exact(d.ddc, n, big_n);
  return d;
}

}  // namespace defect_lens
