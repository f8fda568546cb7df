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

#include "defect_lens/report.hpp"

#include <cmath>
#include <limits>

#include "defect_lens/error.hpp"
#include "defect_lens/io.hpp"

namespace defect_lens {

using nlohmann::ordered_json;

namespace {

std::string csv_cell(const std::string& cell) {
  if (cell.find_first_of(",\"\n") == std::string::npos) return cell;
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void append_row(std::string& out, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out += ',';
    out += csv_cell(cells[i]);
  }
  out += '\n';
}

}  // namespace

std::string CsvTable::to_csv() const {
  std::string out;
  append_row(out, header);
  for (const auto& row : rows) append_row(out, row);
  return out;
}

std::string Report::json_text() const { return json.dump(2) + "\n"; }

ordered_json report_skeleton(const std::string& subcommand, ordered_json config) {
  ordered_json doc;
  doc["schema"] = kReportSchema;
  doc["subcommand"] = subcommand;
  doc["config"] = std::move(config);
  doc["warnings"] = ordered_json::array();
  doc["results"] = ordered_json::object();
  return doc;
}

void put_extended(ordered_json& object, const std::string& name, double value) {
  if (std::isinf(value)) {
    object[name] = nullptr;
    object[name + "_inf"] = value > 0 ? 1 : -1;
  } else if (std::isnan(value)) {
    object[name] = nullptr;
    object[name + "_reason"] = "undefined";
  } else {
    object[name] = value;
  }
}

double get_extended(const ordered_json& object, const std::string& name) {
  const auto it = object.find(name);
  if (it == object.end()) fail(ErrorKind::kParse, "report: missing field '" + name + "'");
  if (!it->is_null()) return it->get<double>();
  const auto flag = object.find(name + "_inf");
  if (flag == object.end()) return std::numeric_limits<double>::quiet_NaN();
  return flag->get<int>() > 0 ? kInfinity : -kInfinity;
}

ordered_json to_json(const Decomposition& d) {
  ordered_json o;
  o["sensitivity_factor"] = d.sensitivity_factor;
  put_extended(o, "estimation_error", d.estimation_error);
  put_extended(o, "ddc", d.ddc);
  put_extended(o, "data_deficiency", d.data_deficiency);
  put_extended(o, "problem_difficulty", d.problem_difficulty);
  put_extended(o, "n_eff_approx", d.n_eff_approx);
  put_extended(o, "n_eff_exact", d.n_eff_exact);
  return o;
}

Decomposition decomposition_from_json(const ordered_json& object) {
  Decomposition d;
  d.sensitivity_factor = get_extended(object, "sensitivity_factor");
  d.estimation_error = get_extended(object, "estimation_error");
  d.ddc = get_extended(object, "ddc");
  d.data_deficiency = get_extended(object, "data_deficiency");
  d.problem_difficulty = get_extended(object, "problem_difficulty");
  d.n_eff_approx = get_extended(object, "n_eff_approx");
  d.n_eff_exact = get_extended(object, "n_eff_exact");
  return d;
}

std::string factor_key(double factor) { return format_number(factor); }

std::vector<std::string> validate_report(const ordered_json& document) {
  std::vector<std::string> problems;
  if (!document.is_object()) return {"document is not an object"};
  auto expect = [&](const char* key, auto predicate, const char* what) {
    const auto it = document.find(key);
    if (it == document.end()) {
      problems.push_back(std::string("missing '") + key + "'");
    } else if (!predicate(*it)) {
      problems.push_back(std::string("'") + key + "' is not " + what);
    }
  };
  expect("schema", [](const ordered_json& v) { return v.is_string() && v == kReportSchema; }, kReportSchema);
  expect("subcommand", [](const ordered_json& v) { return v.is_string(); }, "a string");
  expect("config", [](const ordered_json& v) { return v.is_object(); }, "an object");
  expect("warnings", [](const ordered_json& v) { return v.is_array(); }, "an array");
  expect("results", [](const ordered_json& v) { return v.is_object(); }, "an object");

  // Every null field needs to be explained by an infinity flag or a documented gap.
  auto check_nulls = [&](const ordered_json& node, const std::string& path, auto& self) -> void {
    if (node.is_object()) {
      for (auto it = node.begin(); it != node.end(); ++it) {
        if (it->is_null() && node.find(it.key() + "_inf") == node.end() && node.find(it.key() + "_reason") == node.end()) {
          problems.push_back("unflagged null at " + path + "/" + it.key());
        }
        self(*it, path + "/" + it.key(), self);
      }
    } else if (node.is_array()) {
      for (std::size_t i = 0; i < node.size(); ++i) self(node[i], path + "/" + std::to_string(i), self);
    }
  };
  if (const auto it = document.find("results"); it != document.end()) check_nulls(*it, "results", check_nulls);
  return problems;
}

std::vector<std::filesystem::path> write_report(const Report& report, const std::filesystem::path& directory,
                                                ReportFormat format) {
  std::error_code ec;
  std::filesystem::create_directories(directory, ec);
  if (ec) fail(ErrorKind::kIo, "cannot create output directory: " + directory.string());
  std::vector<std::filesystem::path> written;
  if (format != ReportFormat::kCsv) {
    const auto path = directory / (report.subcommand + ".json");
    write_file(path, report.json_text());
    written.push_back(path);
  }
  if (format != ReportFormat::kJson) {
    for (const auto& table : report.tables) {
      const auto path = directory / (table.name + ".csv");
      write_file(path, table.to_csv());
      written.push_back(path);
    }
  }
  return written;
}

}  // namespace defect_lens
