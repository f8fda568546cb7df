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

#ifndef DEFECT_LENS_IO_HPP
#define DEFECT_LENS_IO_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "defect_lens/assist.hpp"
#include "defect_lens/changepoint.hpp"
#include "defect_lens/types.hpp"

namespace defect_lens {

// CSV schemas (UTF-8, comma separated, header row required, ISO-8601 dates):
//   survey     date,n,ybar
//   benchmark  date,N,count | date,N,ybar     (optional sd column)
//   paired     date,a,b                       (optional n column)
//   values     date,value | date,ybar
// Extra columns are ignored. Rows must have strictly increasing dates.

enum class SeriesKind { kSurvey, kBenchmark, kPaired, kValues };

struct SeriesFile {
  SeriesKind kind = SeriesKind::kSurvey;
  std::variant<std::vector<SurveySnapshot>, std::vector<BenchmarkPoint>, PairedSeries,
               std::vector<SeriesPoint>>
      rows;
};

/// Parses CSV text. `source` names the input in error messages. In binary
/// mode proportions must lie in [0, 1] and benchmark SDs are derived when no
/// sd column is present; continuous benchmarks require an sd column.
SeriesFile parse_series_text(std::string_view text, SeriesKind kind, OutcomeMode mode,
                             const std::string& source = "<input>");
SeriesFile parse_series(const std::filesystem::path& path, SeriesKind kind, OutcomeMode mode);

std::vector<SurveySnapshot> read_survey(const std::filesystem::path& path, OutcomeMode mode);
std::vector<BenchmarkPoint> read_benchmark(const std::filesystem::path& path, OutcomeMode mode);
PairedSeries read_paired(const std::filesystem::path& path);
std::vector<SeriesPoint> read_values(const std::filesystem::path& path);

/// Benchmark side of a subgroup comparison:
///   date,N_I,N_II,ybar,gap[,p11]
/// ybar is the overall outcome mean, gap the group II minus group I mean and
/// p11 the share with Y = 1 in group II.
struct SubgroupBenchmark {
  Date date{};
  std::int64_t group_size_1 = 0;
  std::int64_t group_size_2 = 0;
  double outcome_mean = 0.0;
  double gap = 0.0;
  std::optional<double> p11;
};

std::vector<SubgroupBenchmark> parse_subgroup_benchmark_text(std::string_view text,
                                                             const std::string& source = "<input>");
std::vector<SubgroupBenchmark> read_subgroup_benchmark(const std::filesystem::path& path);

enum class AlignPolicy { kExact, kNearestPreceding };

struct MatchedPair {
  SurveySnapshot survey;
  BenchmarkPoint bench;
};

struct Alignment {
  std::vector<MatchedPair> pairs;
  std::vector<Date> unmatched;  // survey dates with no benchmark partner
};

/// Joins survey rows to benchmark rows. Nearest-preceding takes the latest
/// benchmark dated on or before each survey date.
Alignment align(std::span<const SurveySnapshot> survey, std::span<const BenchmarkPoint> bench,
                AlignPolicy policy);

/// Index of the latest date <= target in an ascending date list, or -1.
std::ptrdiff_t latest_on_or_before(std::span<const Date> dates, const Date& target);

struct IncidentSeries {
  std::vector<double> values;
  std::vector<std::string> warnings;  // downward revisions
};

/// First differences of a cumulative series. Negative differences are kept
/// and flagged.
IncidentSeries to_incident(std::span<const double> cumulative);

struct IncidentPoints {
  std::vector<SeriesPoint> points;  // dated at the later of each pair
  std::vector<std::string> warnings;
};
IncidentPoints to_incident(std::span<const SeriesPoint> cumulative);

/// Shortest decimal text that parses back to the same double; "inf" for +inf.
std::string format_number(double value);

/// Reads a whole file; Error(kIo) when it cannot be opened.
std::string read_file(const std::filesystem::path& path);

/// Truncates and writes `contents`; Error(kIo) on failure.
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace defect_lens

#endif  // DEFECT_LENS_IO_HPP
