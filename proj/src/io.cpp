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

#include "defect_lens/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "defect_lens/decomp.hpp"
#include "defect_lens/error.hpp"

namespace defect_lens {

Date parse_date(std::string_view text) {
  auto bad = [&]() -> Date { fail(ErrorKind::kParse, "invalid ISO-8601 date '" + std::string(text) + "'"); };
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return bad();
  int y = 0;
  unsigned m = 0;
  unsigned d = 0;
  auto field = [&](std::size_t pos, std::size_t len, auto& out) {
    for (std::size_t i = pos; i < pos + len; ++i) {
      if (text[i] < '0' || text[i] > '9') return false;
    }
    return std::from_chars(text.data() + pos, text.data() + pos + len, out).ec == std::errc{};
  };
  if (!field(0, 4, y) || !field(5, 2, m) || !field(8, 2, d)) return bad();
  const Date date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!date.ok()) return bad();
  return date;
}

std::string format_date(const Date& date) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(date.year()),
                static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
  return buf;
}

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

struct Row {
  std::size_t line = 0;
  std::vector<std::string_view> fields;
};

// Header lookup plus row-level field conversion with located messages.
class Table {
 public:
  Table(std::string_view text, std::string source) : source_(std::move(source)) {
    if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
    std::size_t line_no = 0;
    std::size_t pos = 0;
    bool have_header = false;
    while (pos <= text.size()) {
      const std::size_t nl = text.find('\n', pos);
      const std::string_view line =
          trim(text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos));
      ++line_no;
      pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
      if (line.empty()) continue;
      if (!have_header) {
        header_ = split_fields(line);
        have_header = true;
      } else {
        rows_.push_back({line_no, split_fields(line)});
      }
    }
    if (rows_.empty()) fail(ErrorKind::kParse, source_ + ": no data rows");
  }

  std::optional<std::size_t> find(std::string_view name) const {
    for (std::size_t i = 0; i < header_.size(); ++i) {
      if (header_[i] == name) return i;
    }
    return std::nullopt;
  }

  std::size_t column(std::string_view name) const {
    if (auto idx = find(name)) return *idx;
    fail(ErrorKind::kParse, source_ + ": missing column '" + std::string(name) + "'");
  }

  const std::vector<Row>& rows() const { return rows_; }

  [[noreturn]] void error(const Row& row, std::size_t col, const std::string& what) const {
    fail(ErrorKind::kParse, source_ + ":" + std::to_string(row.line) + ": column '" + std::string(header_[col]) +
                                "': " + what);
  }

  std::string_view field(const Row& row, std::size_t col) const {
    if (col >= row.fields.size()) error(row, col, "missing value");
    return row.fields[col];
  }

  Date date(const Row& row, std::size_t col) const {
    const std::string_view text = field(row, col);
    try {
      return parse_date(text);
    } catch (const Error&) {
      error(row, col, "unparseable date '" + std::string(text) + "'");
    }
  }

  double real(const Row& row, std::size_t col) const {
    const std::string_view text = field(row, col);
    double value = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || res.ec != std::errc{} || res.ptr != text.data() + text.size() || !std::isfinite(value)) {
      error(row, col, "not a finite number '" + std::string(text) + "'");
    }
    return value;
  }

  std::int64_t integer(const Row& row, std::size_t col) const {
    const std::string_view text = field(row, col);
    std::int64_t value = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
      // Accept integral values written in floating-point form, e.g. "1e6".
      const double r = real(row, col);
      if (r != std::floor(r) || std::fabs(r) > 9.0e18) error(row, col, "not an integer '" + std::string(text) + "'");
      return static_cast<std::int64_t>(r);
    }
    return value;
  }

  double proportion(const Row& row, std::size_t col, OutcomeMode mode) const {
    const double v = real(row, col);
    if (mode == OutcomeMode::kBinary && (v < 0.0 || v > 1.0)) {
      error(row, col, "value " + format_number(v) + " outside [0, 1] in binary mode");
    }
    return v;
  }

  // Dates must be unique and strictly increasing.
  void check_order(std::vector<std::pair<Date, std::size_t>>& seen, const Row& row, std::size_t col,
                   const Date& d) const {
    for (const auto& [prev, line] : seen) {
      if (prev == d) {
        fail(ErrorKind::kParse, source_ + ": duplicate date " + format_date(d) + " at lines " + std::to_string(line) +
                                    " and " + std::to_string(row.line));
      }
    }
    if (!seen.empty() && d < seen.back().first) error(row, col, "dates must be strictly increasing");
    seen.emplace_back(d, row.line);
  }

 private:
  std::string source_;
  std::vector<std::string_view> header_;
  std::vector<Row> rows_;
};

std::vector<SurveySnapshot> parse_survey(const Table& t, OutcomeMode mode, const std::string& source) {
  const std::size_t c_date = t.column("date");
  const std::size_t c_n = t.column("n");
  const std::size_t c_y = t.column("ybar");
  std::vector<std::pair<Date, std::size_t>> seen;
  std::vector<SurveySnapshot> out;
  for (const Row& row : t.rows()) {
    SurveySnapshot s;
    s.date = t.date(row, c_date);
    t.check_order(seen, row, c_date, s.date);
    s.sample_size = t.integer(row, c_n);
    if (s.sample_size < 1) t.error(row, c_n, "sample size must be positive");
    s.sample_mean = t.proportion(row, c_y, mode);
    s.label = source;
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<BenchmarkPoint> parse_benchmark(const Table& t, OutcomeMode mode) {
  const std::size_t c_date = t.column("date");
  const std::size_t c_pop = t.column("N");
  const auto c_count = t.find("count");
  const auto c_ybar = t.find("ybar");
  const auto c_sd = t.find("sd");
  if (!c_count && !c_ybar) t.column("ybar");  // reports the missing column
  if (mode == OutcomeMode::kContinuous && !c_sd) t.column("sd");
  std::vector<std::pair<Date, std::size_t>> seen;
  std::vector<BenchmarkPoint> out;
  for (const Row& row : t.rows()) {
    const Date d = t.date(row, c_date);
    t.check_order(seen, row, c_date, d);
    const std::int64_t pop = t.integer(row, c_pop);
    if (pop < 1) t.error(row, c_pop, "population size must be positive");
    double mean = 0.0;
    if (c_ybar) {
      mean = t.proportion(row, *c_ybar, mode);
    } else {
      const double count = t.real(row, *c_count);
      if (count < 0.0 || count > static_cast<double>(pop)) t.error(row, *c_count, "count outside [0, N]");
      mean = count / static_cast<double>(pop);
    }
    if (c_sd) {
      const double sd = t.real(row, *c_sd);
      if (sd < 0.0) t.error(row, *c_sd, "negative sd");
      out.push_back(make_benchmark(d, pop, mean, sd));
    } else {
      out.push_back(make_binary_benchmark(d, pop, mean));
    }
  }
  return out;
}

PairedSeries parse_paired(const Table& t) {
  const std::size_t c_date = t.column("date");
  const std::size_t c_a = t.column("a");
  const std::size_t c_b = t.column("b");
  const auto c_n = t.find("n");
  std::vector<std::pair<Date, std::size_t>> seen;
  PairedSeries out;
  for (const Row& row : t.rows()) {
    const Date d = t.date(row, c_date);
    t.check_order(seen, row, c_date, d);
    out.dates.push_back(d);
    out.covariate.push_back(t.proportion(row, c_a, OutcomeMode::kBinary));
    out.response.push_back(t.proportion(row, c_b, OutcomeMode::kBinary));
    if (c_n) {
      const std::int64_t n = t.integer(row, *c_n);
      if (n < 1) t.error(row, *c_n, "sample size must be positive");
      out.sample_sizes.push_back(n);
    }
  }
  return out;
}

std::vector<SeriesPoint> parse_values(const Table& t) {
  const std::size_t c_date = t.column("date");
  const auto c_value = t.find("value");
  const std::size_t c_v = c_value ? *c_value : t.column("ybar");
  std::vector<std::pair<Date, std::size_t>> seen;
  std::vector<SeriesPoint> out;
  for (const Row& row : t.rows()) {
    SeriesPoint p;
    p.date = t.date(row, c_date);
    t.check_order(seen, row, c_date, p.date);
    p.value = t.real(row, c_v);
    out.push_back(p);
  }
  return out;
}

}  // namespace

std::vector<SubgroupBenchmark> parse_subgroup_benchmark_text(std::string_view text, const std::string& source) {
  const Table t(text, source);
  const std::size_t c_date = t.column("date");
  const std::size_t c_n1 = t.column("N_I");
  const std::size_t c_n2 = t.column("N_II");
  const std::size_t c_y = t.column("ybar");
  const std::size_t c_gap = t.column("gap");
  const auto c_p11 = t.find("p11");
  std::vector<std::pair<Date, std::size_t>> seen;
  std::vector<SubgroupBenchmark> out;
  for (const Row& row : t.rows()) {
    SubgroupBenchmark b;
    b.date = t.date(row, c_date);
    t.check_order(seen, row, c_date, b.date);
    b.group_size_1 = t.integer(row, c_n1);
    if (b.group_size_1 < 1) t.error(row, c_n1, "group size must be positive");
    b.group_size_2 = t.integer(row, c_n2);
    if (b.group_size_2 < 1) t.error(row, c_n2, "group size must be positive");
    b.outcome_mean = t.proportion(row, c_y, OutcomeMode::kBinary);
    b.gap = t.real(row, c_gap);
    if (b.gap < -1.0 || b.gap > 1.0) t.error(row, c_gap, "gap outside [-1, 1]");
    if (c_p11) b.p11 = t.proportion(row, *c_p11, OutcomeMode::kBinary);
    out.push_back(b);
  }
  return out;
}

std::vector<SubgroupBenchmark> read_subgroup_benchmark(const std::filesystem::path& path) {
  return parse_subgroup_benchmark_text(read_file(path), path.string());
}

SeriesFile parse_series_text(std::string_view text, SeriesKind kind, OutcomeMode mode, const std::string& source) {
  const Table table(text, source);
  SeriesFile out;
  out.kind = kind;
  switch (kind) {
    case SeriesKind::kSurvey:
      out.rows = parse_survey(table, mode, source);
      break;
    case SeriesKind::kBenchmark:
      out.rows = parse_benchmark(table, mode);
      break;
    case SeriesKind::kPaired:
      out.rows = parse_paired(table);
      break;
    case SeriesKind::kValues:
      out.rows = parse_values(table);
      break;
  }
  return out;
}

SeriesFile parse_series(const std::filesystem::path& path, SeriesKind kind, OutcomeMode mode) {
  return parse_series_text(read_file(path), kind, mode, path.string());
}

std::vector<SurveySnapshot> read_survey(const std::filesystem::path& path, OutcomeMode mode) {
  return std::get<std::vector<SurveySnapshot>>(parse_series(path, SeriesKind::kSurvey, mode).rows);
}

std::vector<BenchmarkPoint> read_benchmark(const std::filesystem::path& path, OutcomeMode mode) {
  return std::get<std::vector<BenchmarkPoint>>(parse_series(path, SeriesKind::kBenchmark, mode).rows);
}

PairedSeries read_paired(const std::filesystem::path& path) {
  return std::get<PairedSeries>(parse_series(path, SeriesKind::kPaired, OutcomeMode::kBinary).rows);
}

std::vector<SeriesPoint> read_values(const std::filesystem::path& path) {
  return std::get<std::vector<SeriesPoint>>(parse_series(path, SeriesKind::kValues, OutcomeMode::kContinuous).rows);
}

std::ptrdiff_t latest_on_or_before(std::span<const Date> dates, const Date& target) {
  const auto it = std::upper_bound(dates.begin(), dates.end(), target);
  return static_cast<std::ptrdiff_t>(it - dates.begin()) - 1;
}

Alignment align(std::span<const SurveySnapshot> survey, std::span<const BenchmarkPoint> bench, AlignPolicy policy) {
  require(!survey.empty(), "align: empty survey series");
  require(!bench.empty(), "align: empty benchmark series");
  std::vector<Date> bench_dates;
  bench_dates.reserve(bench.size());
  for (const auto& b : bench) bench_dates.push_back(b.date);

  Alignment out;
  for (const auto& s : survey) {
    const std::ptrdiff_t idx = latest_on_or_before(bench_dates, s.date);
    const bool ok = idx >= 0 && (policy == AlignPolicy::kNearestPreceding || bench_dates[idx] == s.date);
    if (ok) {
      out.pairs.push_back({s, bench[static_cast<std::size_t>(idx)]});
    } else {
      out.unmatched.push_back(s.date);
    }
  }
  if (out.pairs.empty()) {
    fail(ErrorKind::kInvalidArgument,
         policy == AlignPolicy::kExact ? "align: empty date intersection" : "align: no precedent benchmark");
  }
  return out;
}

IncidentSeries to_incident(std::span<const double> cumulative) {
  require(cumulative.size() >= 2, "to_incident: need at least 2 points");
  IncidentSeries out;
  out.values.reserve(cumulative.size() - 1);
  for (std::size_t i = 1; i < cumulative.size(); ++i) {
    const double d = cumulative[i] - cumulative[i - 1];
    if (d < 0.0) out.warnings.push_back("downward revision at position " + std::to_string(i) + ": " + format_number(d));
    out.values.push_back(d);
  }
  return out;
}

IncidentPoints to_incident(std::span<const SeriesPoint> cumulative) {
  require(cumulative.size() >= 2, "to_incident: need at least 2 points");
  IncidentPoints out;
  out.points.reserve(cumulative.size() - 1);
  for (std::size_t i = 1; i < cumulative.size(); ++i) {
    const double d = cumulative[i].value - cumulative[i - 1].value;
    if (d < 0.0) {
      out.warnings.push_back("downward revision at " + format_date(cumulative[i].date) + ": " + format_number(d));
    }
    out.points.push_back({cumulative[i].date, d});
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot open file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) fail(ErrorKind::kIo, "cannot read file: " + path.string());
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::kIo, "cannot write file: " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  out.flush();
  if (!out) fail(ErrorKind::kIo, "cannot write file: " + path.string());
}

}  // namespace defect_lens
