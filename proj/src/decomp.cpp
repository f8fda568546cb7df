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

#include "defect_lens/decomp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "defect_lens/error.hpp"
#include "defect_lens/io.hpp"

namespace defect_lens {

BenchmarkPoint make_binary_benchmark(Date date, std::int64_t population_size, double population_mean) {
  require(population_size >= 1, "benchmark: population size must be at least 1");
  require(population_mean >= 0.0 && population_mean <= 1.0,
          "benchmark: binary population mean must lie in [0, 1]");
  BenchmarkPoint b;
  b.date = date;
  b.population_size = population_size;
  b.population_mean = population_mean;
  b.population_sd = std::sqrt(population_mean * (1.0 - population_mean));
  b.sd_derived = true;
  return b;
}

BenchmarkPoint make_benchmark(Date date, std::int64_t population_size, double population_mean,
                              double population_sd) {
  require(population_size >= 1, "benchmark: population size must be at least 1");
  require(std::isfinite(population_mean), "benchmark: population mean must be finite");
  require(population_sd >= 0.0 && std::isfinite(population_sd), "benchmark: population SD must be non-negative");
  BenchmarkPoint b;
  b.date = date;
  b.population_size = population_size;
  b.population_mean = population_mean;
  b.population_sd = population_sd;
  return b;
}

Moments finite_population_moments(std::span<const double> values) {
  if (values.empty()) fail(ErrorKind::kInvalidArgument, "empty population");
  const double count = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / count;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / count)};
}

double data_deficiency(std::int64_t n, std::int64_t population_size) {
  require(n >= 1, "sample size must be at least 1");
  require(n <= population_size, "sample size exceeds population size");
  return std::sqrt(static_cast<double>(population_size - n) / static_cast<double>(n));
}

namespace {

void check_neff_sizes(std::int64_t n, std::int64_t population_size) {
  require(n >= 1, "effective sample size: n must be at least 1");
  require(n < population_size, "effective sample size: requires n < N");
}

}  // namespace

double effective_sample_size_approx(double ddc, std::int64_t n, std::int64_t population_size) {
  check_neff_sizes(n, population_size);
  if (ddc == 0.0) return kInfinity;
  const double ratio = static_cast<double>(n) / static_cast<double>(population_size - n);
  return ratio / (ddc * ddc);
}

double effective_sample_size_exact(double ddc, std::int64_t n, std::int64_t population_size) {
  const double a = effective_sample_size_approx(ddc, n, population_size);
  if (std::isinf(a)) return kInfinity;
  const double big_n = static_cast<double>(population_size);
  return a / ((a - 1.0) / big_n + 1.0);
}

double mse_srs(double n_eff, std::int64_t population_size, double sigma) {
  require(population_size >= 2, "mse_srs: population size must be at least 2");
  require(n_eff > 0.0, "mse_srs: n_eff must be positive");
  require(n_eff <= static_cast<double>(population_size), "mse_srs: n_eff exceeds population size");
  require(sigma >= 0.0, "mse_srs: sigma must be non-negative");
  const double big_n = static_cast<double>(population_size);
  return (1.0 / (big_n - 1.0)) * ((big_n - n_eff) / n_eff) * sigma * sigma;
}

Decomposition decompose(const SurveySnapshot& survey, const BenchmarkPoint& bench) {
  require(survey.sample_size >= 1, "decompose: sample size must be at least 1");
  require(bench.population_size >= 1, "decompose: population size must be at least 1");
  if (survey.sample_size == bench.population_size) fail(ErrorKind::kDomain, "census: deficiency zero");
  require(survey.sample_size < bench.population_size, "decompose: sample size exceeds population size");
  if (!(bench.population_sd > 0.0)) fail(ErrorKind::kDomain, "degenerate benchmark: ddc undefined");

  Decomposition d;
  d.estimation_error = survey.sample_mean - bench.population_mean;
  d.data_deficiency = data_deficiency(survey.sample_size, bench.population_size);
  d.problem_difficulty = bench.population_sd;
  d.ddc = d.estimation_error / (d.data_deficiency * d.problem_difficulty);
  d.n_eff_approx = effective_sample_size_approx(d.ddc, survey.sample_size, bench.population_size);
  d.n_eff_exact = effective_sample_size_exact(d.ddc, survey.sample_size, bench.population_size);
  d.sensitivity_factor = 1.0;
  return d;
}

BenchmarkPoint scale_benchmark(const BenchmarkPoint& bench, double factor) {
  if (!(factor > 0.0) || !std::isfinite(factor)) {
    fail(ErrorKind::kInvalidArgument, "sensitivity factor " + format_number(factor) + " must be positive");
  }
  BenchmarkPoint scaled = bench;
  scaled.population_mean = bench.population_mean * factor;
  if (bench.sd_derived) {
    if (scaled.population_mean < 0.0 || scaled.population_mean > 1.0) {
      std::ostringstream msg;
      msg << "sensitivity factor " << format_number(factor) << " moves the binary benchmark mean to "
          << format_number(scaled.population_mean) << ", outside [0, 1]";
      fail(ErrorKind::kDomain, msg.str());
    }
    scaled.population_sd = std::sqrt(scaled.population_mean * (1.0 - scaled.population_mean));
  }
  return scaled;
}

std::vector<Decomposition> sensitivity_sweep(const SurveySnapshot& survey, const BenchmarkPoint& bench,
                                             std::span<const double> factors) {
  std::vector<Decomposition> out;
  out.reserve(factors.size());
  for (double f : factors) {
    Decomposition d = decompose(survey, scale_benchmark(bench, f));
    d.sensitivity_factor = f;
    out.push_back(d);
  }
  return out;
}

std::vector<double> default_sensitivity_factors() { return {0.9, 0.95, 1.0, 1.05, 1.1}; }

RangeSummary summarize_range(std::span<const double> values) {
  require(!values.empty(), "summary of an empty series");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t m = sorted.size();
  RangeSummary s;
  s.min = sorted.front();
  s.max = sorted.back();
  s.median = (m % 2 == 1) ? sorted[m / 2] : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);
  return s;
}

DecompositionSummary summarize(std::span<const Decomposition> rows) {
  auto column = [&](double Decomposition::*field) {
    std::vector<double> v;
    v.reserve(rows.size());
    for (const auto& r : rows) v.push_back(r.*field);
    return summarize_range(v);
  };
  DecompositionSummary s;
  s.estimation_error = column(&Decomposition::estimation_error);
  s.ddc = column(&Decomposition::ddc);
  s.data_deficiency = column(&Decomposition::data_deficiency);
  s.problem_difficulty = column(&Decomposition::problem_difficulty);
  s.n_eff_approx = column(&Decomposition::n_eff_approx);
  const double implied =
      s.estimation_error.median / (s.data_deficiency.median * s.problem_difficulty.median);
  s.median_ddc_relative_gap = (s.ddc.median == 0.0) ? std::abs(implied)
                                                    : std::abs(implied - s.ddc.median) / std::abs(s.ddc.median);
  return s;
}

}  // namespace defect_lens
