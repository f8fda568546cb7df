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

#ifndef DEFECT_LENS_TYPES_HPP
#define DEFECT_LENS_TYPES_HPP

#include <chrono>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>

namespace defect_lens {

using Date = std::chrono::year_month_day;

/// Parses a strict ISO-8601 calendar date (YYYY-MM-DD). Throws Error(kParse).
Date parse_date(std::string_view text);
std::string format_date(const Date& date);

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class OutcomeMode { kBinary, kContinuous };

/// Gold-standard side of a comparison: population size, mean and SD at a date.
struct BenchmarkPoint {
  Date date{};
  std::int64_t population_size = 0;
  double population_mean = 0.0;
  double population_sd = 0.0;
  /// True when population_sd was derived as sqrt(p(1-p)) from a binary mean.
  /// Scaled copies re-derive it.
  bool sd_derived = false;
};

/// Benchmark for a binary outcome; SD is sqrt(mean * (1 - mean)).
BenchmarkPoint make_binary_benchmark(Date date, std::int64_t population_size, double population_mean);
BenchmarkPoint make_benchmark(Date date, std::int64_t population_size, double population_mean,
                              double population_sd);

struct SurveySnapshot {
  Date date{};
  std::int64_t sample_size = 0;
  double sample_mean = 0.0;
  std::string label;
};

/// Three-way error decomposition plus effective sample sizes for one
/// survey/benchmark comparison.
struct Decomposition {
  double estimation_error = 0.0;
  double ddc = 0.0;
  double data_deficiency = 0.0;
  double problem_difficulty = 0.0;
  double n_eff_approx = 0.0;  // +inf when ddc == 0
  double n_eff_exact = 0.0;   // +inf when ddc == 0
  double sensitivity_factor = 1.0;

  friend bool operator==(const Decomposition&, const Decomposition&) = default;
};

}  // namespace defect_lens

#endif  // DEFECT_LENS_TYPES_HPP
