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

#ifndef DEFECT_LENS_DECOMP_HPP
#define DEFECT_LENS_DECOMP_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "defect_lens/types.hpp"

namespace defect_lens {

struct Moments {
  double mean = 0.0;
  double sd = 0.0;
};

/// Population mean and SD with denominator N. The error decomposition is an
/// exact identity only under this convention.
Moments finite_population_moments(std::span<const double> values);

/// Splits Ybar_n - Ybar_N into ddc x data deficiency x problem difficulty,
/// solving for the ddc by plug-in, and fills both effective sample sizes.
///
/// Requires n < N and a positive benchmark SD. A survey that matches the
/// benchmark exactly is valid and yields ddc 0 with infinite n_eff.
Decomposition decompose(const SurveySnapshot& survey, const BenchmarkPoint& bench);

/// sqrt((N - n) / n).
double data_deficiency(std::int64_t n, std::int64_t population_size);

/// (n / (N - n)) / ddc^2, the large-N simplification. +inf when ddc == 0.
double effective_sample_size_approx(double ddc, std::int64_t n, std::int64_t population_size);

/// SRS size with the same MSE, before dropping the 1/N terms:
/// A / ((A - 1) / N + 1) with A the approximate value. Never exceeds N.
double effective_sample_size_exact(double ddc, std::int64_t n, std::int64_t population_size);

/// MSE of an SRS mean of size n_eff without replacement:
/// (1 / (N - 1)) * ((N - n_eff) / n_eff) * sigma^2.
double mse_srs(double n_eff, std::int64_t population_size, double sigma);

/// Copy of `bench` with the mean scaled by `factor`. Derived binary SDs are
/// re-derived from the scaled mean; a binary mean leaving [0, 1] is an error.
BenchmarkPoint scale_benchmark(const BenchmarkPoint& bench, double factor);

/// One decomposition per factor. Out-of-range scaled means are an error,
/// never clipped.
std::vector<Decomposition> sensitivity_sweep(const SurveySnapshot& survey, const BenchmarkPoint& bench,
                                             std::span<const double> factors);

/// The benchmark-imprecision factors used by default.
std::vector<double> default_sensitivity_factors();

/// Median, minimum and maximum of a field over a series of comparisons.
struct RangeSummary {
  double median = 0.0;
  double min = 0.0;
  double max = 0.0;
};

struct DecompositionSummary {
  RangeSummary estimation_error;
  RangeSummary ddc;
  RangeSummary data_deficiency;
  RangeSummary problem_difficulty;
  RangeSummary n_eff_approx;
  /// median(ddc) against median(error) / (median(deficiency) * median(difficulty)).
  /// The medians of a product are not the product of medians, so this is a
  /// consistency gauge with tolerance, not an identity.
  double median_ddc_relative_gap = 0.0;
};

RangeSummary summarize_range(std::span<const double> values);
DecompositionSummary summarize(std::span<const Decomposition> rows);

}  // namespace defect_lens

#endif  // DEFECT_LENS_DECOMP_HPP
