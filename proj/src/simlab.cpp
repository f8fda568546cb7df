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

#include "defect_lens/simlab.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "defect_lens/assist.hpp"
#include "defect_lens/decomp.hpp"
#include "defect_lens/error.hpp"
#include "defect_lens/io.hpp"
#include "defect_lens/rng.hpp"

namespace defect_lens {

namespace {

std::int64_t nearest_count(double share, std::int64_t size) {
  return std::llround(share * static_cast<double>(size));
}

// Pearson correlation with denominator-N moments.
double population_correlation(std::span<const double> x, std::span<const std::uint8_t> r) {
  const std::size_t n = x.size();
  double mx = 0.0;
  double mr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    mr += r[i];
  }
  mx /= static_cast<double>(n);
  mr /= static_cast<double>(n);
  double sxx = 0.0;
  double srr = 0.0;
  double sxr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dr = r[i] - mr;
    sxx += dx * dx;
    srr += dr * dr;
    sxr += dx * dr;
  }
  if (!(sxx > 0.0)) fail(ErrorKind::kDomain, "ddc undefined: constant outcome");
  if (!(srr > 0.0)) fail(ErrorKind::kDomain, "ddc undefined: constant recording indicator");
  return sxr / std::sqrt(sxx * srr);
}

void check_recorded(const FinitePopulation& pop) {
  require(!pop.outcomes.empty(), "empty population");
  require(pop.recorded.size() == pop.size(), "population has no recording indicator");
}

void check_subgroup(const FinitePopulation& pop) {
  require(pop.subgroup.size() == pop.size(), "population has no subgroup indicator");
}

double identity_residual(std::span<const double> y, std::span<const std::uint8_t> r) {
  const Moments m = finite_population_moments(y);
  double sum = 0.0;
  std::int64_t n = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (r[i]) {
      sum += y[i];
      ++n;
    }
  }
  const double rho = population_correlation(y, r);
  const double ybar_n = sum / static_cast<double>(n);
  return (ybar_n - m.mean) - rho * data_deficiency(n, static_cast<std::int64_t>(y.size())) * m.sd;
}

}  // namespace

std::int64_t FinitePopulation::recorded_count() const {
  return std::count(recorded.begin(), recorded.end(), std::uint8_t{1});
}

FinitePopulation generate_population(std::int64_t size, double prevalence,
                                     const std::optional<SubgroupSpec>& subgroup, std::uint64_t seed) {
  require(size >= 1, "population size must be positive");
  require(prevalence >= 0.0 && prevalence <= 1.0, "prevalence must lie in [0, 1]");
  const auto n = static_cast<std::size_t>(size);
  FinitePopulation pop;
  pop.outcomes.assign(n, 0.0);
  Rng rng(seed);

  if (!subgroup) {
    const auto ones = static_cast<std::size_t>(nearest_count(prevalence, size));
    std::fill_n(pop.outcomes.begin(), ones, 1.0);
    rng.shuffle(std::span<double>(pop.outcomes));
    return pop;
  }

  const double g = subgroup->group_mean;
  const double p11 = subgroup->p11;
  require(g >= 0.0 && g <= 1.0, "subgroup share must lie in [0, 1]");
  if (p11 > std::min(prevalence, g) + 1e-12) {
    fail(ErrorKind::kInvalidArgument, "infeasible joint table: p11 exceeds min(prevalence, group share) = " +
                                          format_number(std::min(prevalence, g)));
  }
  if (p11 < std::max(0.0, prevalence + g - 1.0) - 1e-12) {
    fail(ErrorKind::kInvalidArgument, "infeasible joint table: p11 below max(0, prevalence + group share - 1) = " +
                                          format_number(std::max(0.0, prevalence + g - 1.0)));
  }
  const std::int64_t n11 = nearest_count(p11, size);
  const std::int64_t n10 = nearest_count(prevalence, size) - n11;
  const std::int64_t n01 = nearest_count(g, size) - n11;
  const std::int64_t n00 = size - n11 - n10 - n01;
  if (n10 < 0 || n01 < 0 || n00 < 0) {
    fail(ErrorKind::kInvalidArgument, "infeasible joint table after rounding to " + std::to_string(size) + " units");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(std::span<std::size_t>(order));
  pop.subgroup.assign(n, 0);
  std::size_t k = 0;
  auto place = [&](std::int64_t count, double y, std::uint8_t grp) {
    for (std::int64_t c = 0; c < count; ++c, ++k) {
      pop.outcomes[order[k]] = y;
      pop.subgroup[order[k]] = grp;
    }
  };
  place(n11, 1.0, 1);
  place(n10, 1.0, 0);
  place(n01, 0.0, 1);
  place(n00, 0.0, 0);
  return pop;
}

FinitePopulation generate_continuous_population(std::int64_t size, double mean, double sd, std::uint64_t seed) {
  require(size >= 1, "population size must be positive");
  require(std::isfinite(mean) && sd >= 0.0, "continuous population needs a finite mean and non-negative sd");
  FinitePopulation pop;
  pop.outcomes.resize(static_cast<std::size_t>(size));
  Rng rng(seed);
  for (double& v : pop.outcomes) v = rng.normal();
  // Standardize so the realized moments hit the targets.
  const Moments m = finite_population_moments(pop.outcomes);
  for (double& v : pop.outcomes) v = m.sd > 0.0 ? mean + sd * (v - m.mean) / m.sd : mean;
  return pop;
}

FinitePopulation apply_selection(const FinitePopulation& pop, const SelectionMechanism& mechanism,
                                 std::uint64_t seed) {
  require(!pop.outcomes.empty(), "empty population");
  const std::size_t n_pop = pop.size();
  FinitePopulation out = pop;
  out.recorded.assign(n_pop, 0);
  Rng rng(seed);

  if (const auto* srs = std::get_if<SrsSelection>(&mechanism)) {
    require(srs->n >= 1 && static_cast<std::size_t>(srs->n) < n_pop, "srs: n must lie in [1, N-1]");
    std::vector<std::size_t> idx(n_pop);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t k = 0; k < static_cast<std::size_t>(srs->n); ++k) {
      const std::size_t j = k + static_cast<std::size_t>(rng.uniform_index(n_pop - k));
      std::swap(idx[k], idx[j]);
      out.recorded[idx[k]] = 1;
    }
  } else if (const auto* lg = std::get_if<LogisticSelection>(&mechanism)) {
    for (std::size_t i = 0; i < n_pop; ++i) {
      out.recorded[i] = rng.bernoulli(logistic(lg->alpha + lg->beta * pop.outcomes[i])) ? 1 : 0;
    }
    const std::int64_t n = out.recorded_count();
    if (n == 0 || static_cast<std::size_t>(n) == n_pop) fail(ErrorKind::kDomain, "degenerate recording");
  } else {
    const auto& fixed = std::get<FixedSetSelection>(mechanism);
    for (std::size_t i : fixed.indices) {
      require(i < n_pop, "fixed set: index " + std::to_string(i) + " out of range");
      require(!out.recorded[i], "fixed set: duplicate index " + std::to_string(i));
      out.recorded[i] = 1;
    }
    require(!fixed.indices.empty() && fixed.indices.size() < n_pop, "fixed set must be a non-empty proper subset");
  }
  return out;
}

double exact_ddc(const FinitePopulation& pop) {
  check_recorded(pop);
  return population_correlation(pop.outcomes, pop.recorded);
}

std::vector<double> subgroup_contrast(const FinitePopulation& pop) {
  check_subgroup(pop);
  std::vector<double> out(pop.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = pop.subgroup[i] ? pop.outcomes[i] : -pop.outcomes[i];
  return out;
}

double exact_subgroup_ddc(const FinitePopulation& pop) {
  check_recorded(pop);
  return population_correlation(subgroup_contrast(pop), pop.recorded);
}

double verify_identity(const FinitePopulation& pop) {
  check_recorded(pop);
  return identity_residual(pop.outcomes, pop.recorded);
}

double verify_subgroup_identity(const FinitePopulation& pop) {
  check_recorded(pop);
  return identity_residual(subgroup_contrast(pop), pop.recorded);
}

SurveySnapshot recorded_snapshot(const FinitePopulation& pop) {
  check_recorded(pop);
  double sum = 0.0;
  std::int64_t n = 0;
  for (std::size_t i = 0; i < pop.size(); ++i) {
    if (pop.recorded[i]) {
      sum += pop.outcomes[i];
      ++n;
    }
  }
  require(n > 0, "no recorded units");
  SurveySnapshot s;
  s.sample_size = n;
  s.sample_mean = sum / static_cast<double>(n);
  s.label = "simulated";
  return s;
}

BenchmarkPoint population_benchmark(const FinitePopulation& pop) {
  const Moments m = finite_population_moments(pop.outcomes);
  return make_benchmark(Date{}, static_cast<std::int64_t>(pop.size()), m.mean, m.sd);
}

double mc_mse_srs(const FinitePopulation& pop, std::int64_t n, int replicates, std::uint64_t seed) {
  require(!pop.outcomes.empty(), "empty population");
  const std::size_t n_pop = pop.size();
  require(n >= 1 && static_cast<std::size_t>(n) <= n_pop, "mc_mse_srs: n must lie in [1, N]");
  require(replicates >= 1, "mc_mse_srs: at least one replicate");
  const double pop_mean = finite_population_moments(pop.outcomes).mean;
  const auto take = static_cast<std::size_t>(n);

  Rng rng(seed);
  std::vector<std::size_t> idx(n_pop);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  double total = 0.0;
  for (int rep = 0; rep < replicates; ++rep) {
    // Partial Fisher-Yates; the index array stays a permutation between draws.
    double sum = 0.0;
    for (std::size_t k = 0; k < take; ++k) {
      const std::size_t j = k + static_cast<std::size_t>(rng.uniform_index(n_pop - k));
      std::swap(idx[k], idx[j]);
      sum += pop.outcomes[idx[k]];
    }
    const double err = sum / static_cast<double>(take) - pop_mean;
    total += err * err;
  }
  return total / replicates;
}

}  // namespace defect_lens
