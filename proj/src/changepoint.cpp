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

#include "defect_lens/changepoint.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/beta.hpp>

#include "defect_lens/error.hpp"
#include "defect_lens/rng.hpp"

// Product-partition change-point model (Barry and Hartigan): observations
// are normal around block means; the block structure has a change
// probability p ~ U(0, p0) per position and a signal-to-noise parameter
// w ~ U(0, w0). Integrating p, w and the means out leaves, for a partition
// with b blocks, within-block SS W and between-block SS B,
//
//   f(rho | x) ∝ ∫_0^p0 p^(b-1) (1-p)^(n-b) dp
//                * ∫_0^w0 w^((b-1)/2) / (W + B w)^((n-1)/2) dw.

namespace defect_lens {

namespace {

double log_beta_fn(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

void check_series(std::span<const SeriesPoint> series) {
  require(series.size() >= 3, "change point: series needs at least 3 points");
  for (const auto& p : series) {
    if (!std::isfinite(p.value)) {
      fail(ErrorKind::kInvalidArgument, "change point: non-finite value at " + format_date(p.date));
    }
  }
}

// Centered prefix sums. Block contributions are sum^2 / len.
struct PrefixSums {
  std::vector<double> sum;  // sum[i] = x_0 + ... + x_{i-1}
  double total_sq = 0.0;
  double grand_mean = 0.0;
  std::vector<double> centered;

  explicit PrefixSums(std::span<const SeriesPoint> series) {
    const std::size_t n = series.size();
    double m = 0.0;
    for (const auto& p : series) m += p.value;
    grand_mean = m / static_cast<double>(n);
    centered.resize(n);
    sum.assign(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      centered[i] = series[i].value - grand_mean;
      sum[i + 1] = sum[i] + centered[i];
      total_sq += centered[i] * centered[i];
    }
  }

  // sum^2 / len over [a, c).
  double block_term(std::size_t a, std::size_t c) const {
    const double s = sum[c] - sum[a];
    return s * s / static_cast<double>(c - a);
  }

  double block_mean(std::size_t a, std::size_t c) const {
    return (sum[c] - sum[a]) / static_cast<double>(c - a);
  }

  double total_ss() const {
    const double n = static_cast<double>(centered.size());
    return std::max(0.0, total_sq - sum.back() * sum.back() / n);
  }

  // W and B from the accumulated block terms.
  double within(double terms) const { return std::max(0.0, total_sq - terms); }
  double between(double terms) const {
    const double n = static_cast<double>(centered.size());
    return std::max(0.0, terms - sum.back() * sum.back() / n);
  }
};

// Adds (1 - w) * block mean + w * grand mean for every point of the
// partition described by `boundary` (boundary[i] = block starts at i).
void accumulate_means(const PrefixSums& ps, const std::vector<std::uint8_t>& boundary, double w, double weight,
                      std::vector<double>& out) {
  const std::size_t n = ps.centered.size();
  std::size_t start = 0;
  for (std::size_t i = 1; i <= n; ++i) {
    if (i == n || boundary[i]) {
      const double mean = ps.block_mean(start, i);
      // Block means are centered, so shrinking toward the grand mean scales them by 1 - w.
      const double shrunk = (1.0 - w) * mean + ps.grand_mean;
      for (std::size_t t = start; t < i; ++t) out[t] += weight * shrunk;
      start = i;
    }
  }
}

struct ChainOutput {
  std::vector<double> change_counts;
  std::vector<double> mean_sums;
  std::size_t kept = 0;
};

ChainOutput run_chain(const PrefixSums& ps, const detail::PartitionScorer& scorer, const ChangePointConfig& config,
                      std::uint64_t seed) {
  const std::size_t n = ps.centered.size();
  Rng rng(seed);
  std::vector<std::uint8_t> boundary(n, 0);
  int blocks = 1;

  ChainOutput out;
  out.change_counts.assign(n, 0.0);
  out.mean_sums.assign(n, 0.0);

  for (int iter = 0; iter < config.iterations; ++iter) {
    // Recompute the block terms from the indicators once per sweep.
    double terms = 0.0;
    {
      std::size_t start = 0;
      for (std::size_t i = 1; i <= n; ++i) {
        if (i == n || boundary[i]) {
          terms += ps.block_term(start, i);
          start = i;
        }
      }
    }

    for (std::size_t i = 1; i < n; ++i) {
      std::size_t left = i - 1;
      while (left > 0 && !boundary[left]) --left;
      std::size_t right = i + 1;
      while (right < n && !boundary[right]) ++right;

      const double merged = ps.block_term(left, right);
      const double split = ps.block_term(left, i) + ps.block_term(i, right);
      const double base = terms - (boundary[i] ? split : merged);
      const int base_blocks = blocks - (boundary[i] ? 1 : 0);

      const double terms0 = base + merged;
      const double terms1 = base + split;
      const double lw0 = scorer.log_weight(base_blocks, ps.within(terms0), ps.between(terms0));
      const double lw1 = scorer.log_weight(base_blocks + 1, ps.within(terms1), ps.between(terms1));
      const double p_change = 1.0 / (1.0 + std::exp(lw0 - lw1));

      const bool change = rng.uniform() < p_change;
      boundary[i] = change ? 1 : 0;
      blocks = base_blocks + (change ? 1 : 0);
      terms = change ? terms1 : terms0;
    }

    if (iter >= config.burn_in) {
      for (std::size_t i = 1; i < n; ++i) out.change_counts[i] += boundary[i];
      const double w = scorer.expected_w(blocks, ps.within(terms), ps.between(terms));
      accumulate_means(ps, boundary, w, 1.0, out.mean_sums);
      ++out.kept;
    }
  }
  return out;
}

}  // namespace

namespace detail {

PartitionScorer::PartitionScorer(std::size_t n, double total_ss, const ChangePointConfig& config)
    : n_(n), w0_(config.w0), within_floor_(1e-12 * total_ss), flat_(!(total_ss > 0.0)) {
  log_p_prior_.assign(n + 1, -std::numeric_limits<double>::infinity());
  for (std::size_t b = 1; b <= n; ++b) {
    const double a = static_cast<double>(b);
    const double c = static_cast<double>(n - b + 1);
    log_p_prior_[b] = std::log(boost::math::ibeta(a, c, config.p0)) + log_beta_fn(a, c);
  }
}

double PartitionScorer::log_weight(int blocks, double within, double between) const {
  const double prior = log_p_prior_[static_cast<std::size_t>(blocks)];
  if (flat_) return prior;
  return prior + log_w_moment(0, blocks, within, between);
}

double PartitionScorer::expected_w(int blocks, double within, double between) const {
  if (flat_) return 0.5 * w0_;
  return std::exp(log_w_moment(1, blocks, within, between) - log_w_moment(0, blocks, within, between));
}

// log ∫_0^w0 w^((b-1)/2 + moment) (W + B w)^(-(n-1)/2) dw.
double PartitionScorer::log_w_moment(int moment, int blocks, double within, double between) const {
  const double w_ss = std::max(within, within_floor_);
  const double e = 0.5 * (blocks - 1) + moment;
  const double m = 0.5 * (static_cast<double>(n_) - 1.0);

  if (blocks == 1 || !(between > 0.0)) {
    return (e + 1.0) * std::log(w0_) - std::log(e + 1.0) - m * std::log(w_ss);
  }

  // Substituting x = B w / (W + B w) turns the integral into an incomplete beta.
  const double alpha = e + 1.0;
  const double c = m - e - 1.0;
  if (c > 0.0) {
    const double x0 = between * w0_ / (w_ss + between * w0_);
    const double ib = boost::math::ibeta(alpha, c, x0);
    if (ib > 1e-280) {
      return (alpha - m) * std::log(w_ss) - alpha * std::log(between) + std::log(ib) + log_beta_fn(alpha, c);
    }
  }

  // Nearly every point is its own block, or the incomplete beta underflowed:
  // integrate directly with the log-integrand shifted by its maximum.
  auto log_f = [&](double w) { return e * std::log(w) - m * std::log(w_ss + between * w); };
  double peak = log_f(w0_);
  if (m > e) {
    const double w_star = e * w_ss / (between * (m - e));
    if (w_star > 0.0 && w_star < w0_) peak = std::max(peak, log_f(w_star));
  }
  auto integrand = [&](double w) { return w <= 0.0 ? 0.0 : std::exp(log_f(w) - peak); };
  const double value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, 0.0, w0_, 15, 1e-12);
  return peak + std::log(value);
}

}  // namespace detail

void validate(const ChangePointConfig& config) {
  require(config.p0 > 0.0 && config.p0 <= 1.0, "change point: p0 must lie in (0, 1]");
  require(config.w0 > 0.0 && config.w0 <= 1.0, "change point: w0 must lie in (0, 1]");
  require(config.burn_in >= 0, "change point: burn-in must be non-negative");
  require(config.iterations > config.burn_in, "change point: iterations must exceed burn-in");
  require(config.threshold > 0.0 && config.threshold < 1.0, "change point: threshold must lie in (0, 1)");
  require(config.chains >= 1, "change point: at least one chain");
}

ChangePointResult bcp_posterior(std::span<const SeriesPoint> series, const ChangePointConfig& config) {
  check_series(series);
  validate(config);
  const std::size_t n = series.size();
  const PrefixSums ps(series);
  const detail::PartitionScorer scorer(n, ps.total_ss(), config);

  std::vector<ChainOutput> chains(static_cast<std::size_t>(config.chains));
  if (config.chains == 1) {
    chains[0] = run_chain(ps, scorer, config, derive_seed(config.seed, 0));
  } else {
    std::vector<std::jthread> workers;
    for (int c = 0; c < config.chains; ++c) {
      workers.emplace_back([&, c] {
        chains[static_cast<std::size_t>(c)] = run_chain(ps, scorer, config, derive_seed(config.seed, c));
      });
    }
  }

  ChangePointResult result;
  result.probabilities.assign(n, 0.0);
  result.posterior_means.assign(n, 0.0);
  std::size_t kept = 0;
  for (const auto& chain : chains) {
    for (std::size_t i = 0; i < n; ++i) {
      result.probabilities[i] += chain.change_counts[i];
      result.posterior_means[i] += chain.mean_sums[i];
    }
    kept += chain.kept;
  }
  for (std::size_t i = 0; i < n; ++i) {
    result.probabilities[i] /= static_cast<double>(kept);
    result.posterior_means[i] /= static_cast<double>(kept);
  }
  result.probabilities[0] = 0.0;

  std::vector<Date> dates;
  for (const auto& p : series) dates.push_back(p.date);
  result.intervals = detect_intervals(result.probabilities, dates, config.threshold);
  return result;
}

ChangePointResult exact_posterior_small(std::span<const SeriesPoint> series, const ChangePointConfig& config) {
  check_series(series);
  validate(config);
  const std::size_t n = series.size();
  if (n > kMaxEnumerationLength) fail(ErrorKind::kInvalidArgument, "enumeration infeasible");
  const PrefixSums ps(series);
  const detail::PartitionScorer scorer(n, ps.total_ss(), config);

  const std::size_t count = std::size_t{1} << (n - 1);
  std::vector<double> log_weights(count);
  std::vector<double> shrinkage(count);
  std::vector<std::uint8_t> boundary(n, 0);
  auto load = [&](std::size_t mask) {
    for (std::size_t i = 1; i < n; ++i) boundary[i] = static_cast<std::uint8_t>((mask >> (i - 1)) & 1U);
  };
  for (std::size_t mask = 0; mask < count; ++mask) {
    load(mask);
    double terms = 0.0;
    int blocks = 0;
    std::size_t start = 0;
    for (std::size_t i = 1; i <= n; ++i) {
      if (i == n || boundary[i]) {
        terms += ps.block_term(start, i);
        ++blocks;
        start = i;
      }
    }
    log_weights[mask] = scorer.log_weight(blocks, ps.within(terms), ps.between(terms));
    shrinkage[mask] = scorer.expected_w(blocks, ps.within(terms), ps.between(terms));
  }
  const double top = *std::max_element(log_weights.begin(), log_weights.end());
  double norm = 0.0;
  for (double lw : log_weights) norm += std::exp(lw - top);

  ChangePointResult result;
  result.probabilities.assign(n, 0.0);
  result.posterior_means.assign(n, 0.0);
  for (std::size_t mask = 0; mask < count; ++mask) {
    const double weight = std::exp(log_weights[mask] - top) / norm;
    load(mask);
    for (std::size_t i = 1; i < n; ++i) result.probabilities[i] += weight * boundary[i];
    accumulate_means(ps, boundary, shrinkage[mask], weight, result.posterior_means);
  }

  std::vector<Date> dates;
  for (const auto& p : series) dates.push_back(p.date);
  result.intervals = detect_intervals(result.probabilities, dates, config.threshold);
  return result;
}

std::vector<DateInterval> detect_intervals(std::span<const double> probabilities, std::span<const Date> dates,
                                           double threshold) {
  require(probabilities.size() == dates.size(), "detect_intervals: probabilities and dates differ in length");
  std::vector<DateInterval> out;
  std::size_t i = 0;
  while (i < probabilities.size()) {
    if (!(probabilities[i] > threshold)) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < probabilities.size() && probabilities[j + 1] > threshold) ++j;
    out.push_back({dates[i], dates[j], i, j});
    i = j + 1;
  }
  return out;
}

}  // namespace defect_lens
