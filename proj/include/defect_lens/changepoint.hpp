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

#ifndef DEFECT_LENS_CHANGEPOINT_HPP
#define DEFECT_LENS_CHANGEPOINT_HPP

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "defect_lens/types.hpp"

namespace defect_lens {

struct SeriesPoint {
  Date date{};
  double value = 0.0;
};

/// Product-partition model settings. p and w get uniform priors on (0, p0)
/// and (0, w0). `iterations` counts all sweeps including burn-in.
struct ChangePointConfig {
  double p0 = 0.2;
  double w0 = 0.2;
  int burn_in = 500;
  int iterations = 5000;
  std::uint64_t seed = 0;
  double threshold = 0.6;
  /// Independent chains, seeded from `seed`, averaged at the end.
  int chains = 1;
};

void validate(const ChangePointConfig& config);

struct DateInterval {
  Date start{};
  Date end{};
  std::size_t first = 0;  // index of start
  std::size_t last = 0;   // index of end, inclusive

  friend bool operator==(const DateInterval&, const DateInterval&) = default;
};

struct ChangePointResult {
  /// probabilities[t] = P(block boundary immediately before t); [0] is 0.
  std::vector<double> probabilities;
  std::vector<double> posterior_means;
  std::vector<DateInterval> intervals;
};

/// Gibbs sampler over the change indicators. Deterministic for a fixed seed.
ChangePointResult bcp_posterior(std::span<const SeriesPoint> series, const ChangePointConfig& config);

inline constexpr std::size_t kMaxEnumerationLength = 14;

/// Exact posterior by summing over all 2^(T-1) partitions. T <= 14.
ChangePointResult exact_posterior_small(std::span<const SeriesPoint> series, const ChangePointConfig& config);

/// Maximal runs of consecutive points with probability strictly above threshold.
std::vector<DateInterval> detect_intervals(std::span<const double> probabilities, std::span<const Date> dates,
                                           double threshold);

namespace detail {

/// Log posterior weight (up to a constant) of a partition with `blocks`
/// blocks, within-block sum of squares W and between-block sum of squares B,
/// for a series of length n. Shared by the sampler and the enumeration.
class PartitionScorer {
 public:
  PartitionScorer(std::size_t n, double total_ss, const ChangePointConfig& config);

  double log_weight(int blocks, double within, double between) const;

  /// Posterior mean of w given the partition; the shrinkage of block means
  /// toward the grand mean.
  double expected_w(int blocks, double within, double between) const;

 private:
  double log_w_moment(int moment, int blocks, double within, double between) const;

  std::size_t n_;
  double w0_;
  double within_floor_;
  bool flat_;  // constant series: the data term is the same for every partition
  std::vector<double> log_p_prior_;  // indexed by block count
};

}  // namespace detail

}  // namespace defect_lens

#endif  // DEFECT_LENS_CHANGEPOINT_HPP
