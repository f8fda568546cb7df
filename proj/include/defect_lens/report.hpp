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

#ifndef DEFECT_LENS_REPORT_HPP
#define DEFECT_LENS_REPORT_HPP

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "defect_lens/types.hpp"

namespace defect_lens {

inline constexpr const char* kReportSchema = "defect-lens/1";

/// Flat table written as CSV. Cells are preformatted text.
struct CsvTable {
  std::string name;  // file stem, e.g. "decompose"
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string to_csv() const;
};

enum class ReportFormat { kJson, kCsv, kBoth };

/// Output of one CLI subcommand: a versioned JSON document plus tidy tables.
struct Report {
  std::string subcommand;
  nlohmann::ordered_json json;
  std::vector<CsvTable> tables;
  /// Set when an iterative fit stopped without converging.
  bool nonconverged = false;

  std::string json_text() const;
};

/// Starts a report document: schema, subcommand, config echo.
nlohmann::ordered_json report_skeleton(const std::string& subcommand, nlohmann::ordered_json config);

// Extended reals are written as a number, or null with a companion
// "<name>_inf": true flag.
void put_extended(nlohmann::ordered_json& object, const std::string& name, double value);
double get_extended(const nlohmann::ordered_json& object, const std::string& name);

nlohmann::ordered_json to_json(const Decomposition& d);
Decomposition decomposition_from_json(const nlohmann::ordered_json& object);

/// Key used for a sensitivity factor block ("0.9", "1", "1.05", ...).
std::string factor_key(double factor);

/// Structural check against the "defect-lens/1" layout; returns problems found.
std::vector<std::string> validate_report(const nlohmann::ordered_json& document);

/// Writes <stem>.json and/or the CSV tables into `directory` (created if needed).
std::vector<std::filesystem::path> write_report(const Report& report, const std::filesystem::path& directory,
                                                ReportFormat format);

}  // namespace defect_lens

#endif  // DEFECT_LENS_REPORT_HPP
