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

#ifndef DEFECT_LENS_ESTIMANDS_HPP
#define DEFECT_LENS_ESTIMANDS_HPP

#include <cstdint>
#include <optional>

#include "defect_lens/types.hpp"

namespace defect_lens {

struct Wave {
  SurveySnapshot survey;
  BenchmarkPoint bench;
};

/// Two consecutive waves of the same survey against the same benchmark.
struct WavePair {
  Wave prev;
  Wave curr;
};

/// Checks ordering and positive SDs.
void validate(const WavePair& pair);

enum class DiffForm {
  kApprox,  // large-N form: (s2_prev + s2_curr) / error^2
  kExact,   // keeps the N/(N-1) and 1/(N-1) terms
};

struct DiffOptions {
  DiffForm form = DiffForm::kApprox;
  /// Population size for the exact form. Defaults to the previous wave's N.
  std::optional<std::int64_t> population_size;
};

/// Error of the survey's wave-to-wave change against the benchmark's change.
double diff_error(const WavePair& pair);

/// Effective size of two equal-size SRS samples whose difference of means
/// has the observed squared error. +inf for a perfect difference estimate.
double diff_neff(const WavePair& pair, const DiffOptions& options = {});

/// Same quantity with the error rebuilt from per-wave ddc, deficiency and
/// SD. Equal to diff_neff (approx form) when the ddcs are plug-in values.
double diff_neff_decomposed(double ddc_prev, double ddc_curr, const WavePair& pair);

/// (Ybar_t - Ybar_{t-1}) / Ybar_{t-1} of the survey minus that of the benchmark.
double reldiff_error(const WavePair& pair);

/// Second-order Taylor form of reldiff_error written through per-wave ddcs:
/// (Y_t / Y_{t-1}) * (e_t / Y_t - e_{t-1} / Y_{t-1}) * (1 - e_{t-1} / Y_{t-1}),
/// where e = ddc * deficiency * SD. Differs from the exact error by
/// O((e_{t-1} / Y_{t-1})^2) relative.
double reldiff_error_decomposed(double ddc_prev, double ddc_curr, const WavePair& pair);

/// Delta-method variance numerator over the squared relative-difference error.
double reldiff_neff(const WavePair& pair);
double reldiff_neff_decomposed(double ddc_prev, double ddc_curr, const WavePair& pair);

/// Joint distribution of a binary outcome Y and binary group indicator G
/// (G = 1 is group II), with survey aggregates per group.
struct SubgroupTable {
  double p11 = 0.0;  // Y=1, G=1
  double p10 = 0.0;  // Y=1, G=0
  double p01 = 0.0;  // Y=0, G=1
  double p00 = 0.0;  // Y=0, G=0
  std::int64_t group_size_1 = 0;   // N_I
  std::int64_t group_size_2 = 0;   // N_II
  std::int64_t sample_size_1 = 0;  // n_I
  std::int64_t sample_size_2 = 0;  // n_II
  double sample_mean_1 = 0.0;      // Ybar_{n_I}
  double sample_mean_2 = 0.0;      // Ybar_{n_II}

  double outcome_mean() const { return p11 + p10; }
  double group_mean() const { return p11 + p01; }
};

/// Builds the joint cells from the outcome mean, group-II share and the
/// joint proportion p11. Infeasible inputs (Frechet bounds) are an error.
SubgroupTable make_subgroup_table(double outcome_mean, double group_mean, double p11);

void validate(const SubgroupTable& table);

enum class SigmaMethod {
  kExact,  // Var(Y*) from the joint table, Y* = Y*G - Y*(1-G)
  kPaper,  // Ybar(1-Ybar) + 4 Gbar(1-Gbar) + 4 (p11 - Ybar Gbar)
};

/// SD of Y*. The two methods disagree in general; both are exposed so a
/// report can show the gap.
double subgroup_sigma(const SubgroupTable& table, SigmaMethod method);

/// Decomposes the subgroup-gap error (Ybar_{n_II} - Ybar_{n_I}) - bench_gap
/// over pooled sizes, with SD of Y* as problem difficulty.
Decomposition subgroup_decompose(const SubgroupTable& table, double bench_gap, SigmaMethod method);

}  // namespace defect_lens

#endif  // DEFECT_LENS_ESTIMANDS_HPP
