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

#ifndef DEFECT_LENS_PIPELINE_HPP
#define DEFECT_LENS_PIPELINE_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "defect_lens/assist.hpp"
#include "defect_lens/changepoint.hpp"
#include "defect_lens/estimands.hpp"
#include "defect_lens/io.hpp"
#include "defect_lens/report.hpp"
#include "defect_lens/simlab.hpp"

// One function per CLI subcommand. Each reads its inputs, runs the analysis
// and returns a Report; nothing is written to disk here.

namespace defect_lens {

inline constexpr std::uint64_t kDefaultSeed = 20210516;

struct DecomposeRun {
  std::filesystem::path survey;
  std::filesystem::path benchmark;
  std::vector<double> factors;  // empty: defaults
  AlignPolicy policy = AlignPolicy::kExact;
  OutcomeMode mode = OutcomeMode::kBinary;
};
Report run_decompose(const DecomposeRun& run);

struct DiffRun {
  std::filesystem::path survey;
  std::filesystem::path benchmark;
  bool relative = false;
  bool decomposed = false;
  std::vector<double> factors;
  AlignPolicy policy = AlignPolicy::kExact;
  OutcomeMode mode = OutcomeMode::kBinary;
  std::optional<std::int64_t> population_size;
};
Report run_diff(const DiffRun& run);

struct SubgroupRun {
  std::filesystem::path survey_group1;  // group I (G = 0)
  std::filesystem::path survey_group2;  // group II (G = 1)
  /// date,N_I,N_II,ybar,gap[,p11]
  std::filesystem::path benchmark_gap;
  std::optional<double> p11;
  SigmaMethod sigma = SigmaMethod::kExact;
  std::vector<double> factors;
};
Report run_subgroup(const SubgroupRun& run);

struct AssistRun {
  std::filesystem::path target;
  std::filesystem::path probability_survey;
  std::filesystem::path benchmark;
  AssistDirection direction = AssistDirection::kInvertUptakeModel;
  std::vector<double> factors;
  bool strict = false;
};
Report run_assist(const AssistRun& run);

struct ChangePointRun {
  std::filesystem::path series;
  bool incident = false;
  ChangePointConfig config;
};
Report run_changepoint(const ChangePointRun& run);

struct SimulateRun {
  std::int64_t population_size = 0;
  double prevalence = 0.5;
  SelectionMechanism mechanism = SrsSelection{};
  int replicates = 100;
  std::uint64_t seed = kDefaultSeed;
  std::optional<SubgroupSpec> subgroup;
  /// SRS replicates behind the Monte Carlo n_eff check on the first replicate.
  int mse_replicates = 200;
};
Report run_simulate(const SimulateRun& run);

/// "srs:<n>", "logistic:<alpha>:<beta>" or "fixed:<i>,<j>,..." (zero-based).
SelectionMechanism parse_mechanism(std::string_view text);

/// Comma-separated positive reals.
std::vector<double> parse_factor_list(std::string_view text);

}  // namespace defect_lens

#endif  // DEFECT_LENS_PIPELINE_HPP
