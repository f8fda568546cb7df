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

#ifndef DEFECT_LENS_SIMLAB_HPP
#define DEFECT_LENS_SIMLAB_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "defect_lens/types.hpp"

namespace defect_lens {

/// Unit-level population used as an exact oracle for the decompositions.
struct FinitePopulation {
  std::vector<double> outcomes;           // Y
  std::vector<std::uint8_t> subgroup;     // G, optional (empty when absent)
  std::vector<std::uint8_t> recorded;     // R, optional (empty when absent)

  std::size_t size() const { return outcomes.size(); }
  std::int64_t recorded_count() const;
};

struct SubgroupSpec {
  double group_mean = 0.0;  // share with G = 1
  double p11 = 0.0;         // share with Y = 1 and G = 1
};

/// Binary population with exactly round(N * prevalence) ones (and the joint
/// subgroup cells rounded the same way), randomly permuted by `seed`.
FinitePopulation generate_population(std::int64_t size, double prevalence,
                                     const std::optional<SubgroupSpec>& subgroup, std::uint64_t seed);

/// Normal outcomes for identity tests on continuous Y.
FinitePopulation generate_continuous_population(std::int64_t size, double mean, double sd, std::uint64_t seed);

struct SrsSelection {
  std::int64_t n = 0;
};
/// P(R = 1 | Y = y) = logistic(alpha + beta * y), independently per unit.
struct LogisticSelection {
  double alpha = 0.0;
  double beta = 0.0;
};
/// Zero-based unit indices.
struct FixedSetSelection {
  std::vector<std::size_t> indices;
};
using SelectionMechanism = std::variant<SrsSelection, LogisticSelection, FixedSetSelection>;

/// Copy of `pop` with the recording indicator drawn from `mechanism`.
FinitePopulation apply_selection(const FinitePopulation& pop, const SelectionMechanism& mechanism,
                                 std::uint64_t seed);

/// Pearson correlation of Y and R over all units, denominator-N moments.
double exact_ddc(const FinitePopulation& pop);

/// Same for Y* = Y*G - Y*(1-G) against R.
double exact_subgroup_ddc(const FinitePopulation& pop);

/// Y* values of a population with subgroup labels.
std::vector<double> subgroup_contrast(const FinitePopulation& pop);

/// (Ybar_n - Ybar_N) - ddc * sqrt((N - n) / n) * sigma_Y.
double verify_identity(const FinitePopulation& pop);

/// The same identity for the mean of Y*.
double verify_subgroup_identity(const FinitePopulation& pop);

/// Survey-side aggregates of the recorded units.
SurveySnapshot recorded_snapshot(const FinitePopulation& pop);

/// Benchmark from the full population (SD with denominator N).
BenchmarkPoint population_benchmark(const FinitePopulation& pop);

/// Monte Carlo mean of (Ybar_n - Ybar_N)^2 over seeded SRS draws of size n.
double mc_mse_srs(const FinitePopulation& pop, std::int64_t n, int replicates, std::uint64_t seed);

}  // namespace defect_lens

#endif  // DEFECT_LENS_SIMLAB_HPP
