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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "defect_lens/changepoint.hpp"
#include "defect_lens/rng.hpp"
#include "support.hpp"

using namespace defect_lens;
using namespace std::chrono;

namespace {

std::vector<SeriesPoint> make_series(const std::vector<double>& values) {
  std::vector<SeriesPoint> s;
  const sys_days start = year{2021} / March / 1;
  for (std::size_t i = 0; i < values.size(); ++i) s.push_back({Date{start + days{static_cast<int>(i)}}, values[i]});
  return s;
}

std::vector<double> step_values(int before, int after, double lo, double hi, double sd, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v;
  for (int i = 0; i < before; ++i) v.push_back(lo + rng.normal(0, sd));
  for (int i = 0; i < after; ++i) v.push_back(hi + rng.normal(0, sd));
  return v;
}

// Brute-force posterior: every partition, with both prior integrals done by
// midpoint quadrature instead of special functions.
std::vector<double> quadrature_posterior(const std::vector<double>& x, double p0, double w0) {
  const int n = static_cast<int>(x.size());
  double mean = 0;
  for (double v : x) mean += v;
  mean /= n;
  const int grid = 200000;
  std::vector<double> log_w(static_cast<std::size_t>(1) << (n - 1));
  for (std::size_t mask = 0; mask < log_w.size(); ++mask) {
    std::vector<int> starts = {0};
    for (int i = 1; i < n; ++i) {
      if ((mask >> (i - 1)) & 1U) starts.push_back(i);
    }
    starts.push_back(n);
    const int b = static_cast<int>(starts.size()) - 1;
    double within = 0, between = 0;
    for (int k = 0; k < b; ++k) {
      double m = 0;
      for (int i = starts[k]; i < starts[k + 1]; ++i) m += x[static_cast<std::size_t>(i)];
      m /= (starts[k + 1] - starts[k]);
      for (int i = starts[k]; i < starts[k + 1]; ++i) within += std::pow(x[static_cast<std::size_t>(i)] - m, 2);
      between += (starts[k + 1] - starts[k]) * std::pow(m - mean, 2);
    }
    double ip = 0, iw = 0;
    for (int g = 0; g < grid; ++g) {
      const double p = p0 * (g + 0.5) / grid;
      ip += std::pow(p, b - 1) * std::pow(1 - p, n - b);
      const double w = w0 * (g + 0.5) / grid;
      iw += std::pow(w, 0.5 * (b - 1)) / std::pow(within + between * w, 0.5 * (n - 1));
    }
    log_w[mask] = std::log(ip * p0 / grid) + std::log(iw * w0 / grid);
  }
  const double top = *std::max_element(log_w.begin(), log_w.end());
  double norm = 0;
  for (double v : log_w) norm += std::exp(v - top);
  std::vector<double> prob(static_cast<std::size_t>(n), 0.0);
  for (std::size_t mask = 0; mask < log_w.size(); ++mask) {
    const double wt = std::exp(log_w[mask] - top) / norm;
    for (int i = 1; i < n; ++i) {
      if ((mask >> (i - 1)) & 1U) prob[static_cast<std::size_t>(i)] += wt;
    }
  }
  return prob;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST(DetectIntervalsTest, HandTrace) {
  const auto s = make_series({0, 0, 0, 0, 0});
  std::vector<Date> dates;
  for (const auto& p : s) dates.push_back(p.date);
  const std::vector<double> probs = {0.1, 0.7, 0.8, 0.2, 0.9};
  const auto iv = detect_intervals(probs, dates, 0.6);
  ASSERT_EQ(iv.size(), 2u);
  EXPECT_EQ(iv[0].first, 1u);
  EXPECT_EQ(iv[0].last, 2u);
  EXPECT_EQ(iv[0].start, dates[1]);
  EXPECT_EQ(iv[0].end, dates[2]);
  EXPECT_EQ(iv[1].first, 4u);
  EXPECT_EQ(iv[1].last, 4u);
  const std::vector<double> low = {0.1, 0.2, 0.6, 0.3, 0.0};
  EXPECT_TRUE(detect_intervals(low, dates, 0.6).empty());
}

TEST(ExactPosteriorTest, MatchesQuadratureOracle) {
  Rng rng(5);
  for (int trial = 0; trial < 4; ++trial) {
    std::vector<double> v;
    for (int i = 0; i < 7; ++i) v.push_back(rng.normal(i < 4 ? 0.0 : 1.0, 0.5));
    ChangePointConfig cfg;
    const auto exact = exact_posterior_small(make_series(v), cfg);
    EXPECT_LT(max_abs_diff(exact.probabilities, quadrature_posterior(v, cfg.p0, cfg.w0)), 1e-5);
  }
  // Non-default priors.
  const std::vector<double> v = {1.0, 1.2, 0.9, 3.0, 3.1, 2.8};
  ChangePointConfig cfg;
  cfg.p0 = 0.7;
  cfg.w0 = 0.9;
  EXPECT_LT(max_abs_diff(exact_posterior_small(make_series(v), cfg).probabilities,
                         quadrature_posterior(v, cfg.p0, cfg.w0)),
            1e-5);
}

TEST(ExactPosteriorTest, StepPeaksAtStep) {
  const std::vector<double> v = {0.2, 0.21, 0.19, 0.6, 0.61, 0.6};
  const auto r = exact_posterior_small(make_series(v), {});
  const auto it = std::max_element(r.probabilities.begin(), r.probabilities.end());
  EXPECT_EQ(it - r.probabilities.begin(), 3);
  EXPECT_EQ(r.probabilities[0], 0.0);
}

TEST(ExactPosteriorTest, ConstantSeriesFollowsPrior) {
  const auto r = exact_posterior_small(make_series({2.0, 2.0, 2.0}), {});
  // With a flat data term the change probability is a ratio of prior integrals.
  const double p0 = 0.2;
  const double b1 = p0 - p0 * p0 + std::pow(p0, 3) / 3;                 // ∫ (1-p)^2
  const double b2 = p0 * p0 / 2 - std::pow(p0, 3) / 3;                   // ∫ p (1-p)
  const double b3 = std::pow(p0, 3) / 3;                                 // ∫ p^2
  const double expected = (b2 + b3) / (b1 + 2 * b2 + b3);
  EXPECT_NEAR(r.probabilities[1], expected, 1e-12);
  EXPECT_NEAR(r.probabilities[2], expected, 1e-12);
  EXPECT_LT(r.probabilities[1], 0.6);
  EXPECT_TRUE(r.intervals.empty());
  for (double m : r.posterior_means) EXPECT_EQ(m, 2.0);
}

TEST(ExactPosteriorTest, ReversalSymmetry) {
  Rng rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> v;
    for (int i = 0; i < 9; ++i) v.push_back(rng.normal(0, 1) + (i > 5 ? 2 : 0));
    std::vector<double> rev(v.rbegin(), v.rend());
    const auto a = exact_posterior_small(make_series(v), {});
    const auto b = exact_posterior_small(make_series(rev), {});
    const std::size_t n = v.size();
    for (std::size_t i = 1; i < n; ++i) EXPECT_NEAR(a.probabilities[i], b.probabilities[n - i], 1e-12);
  }
}

TEST(ExactPosteriorTest, TooLong) {
  std::string msg;
  EXPECT_TRUE(dltest::throws_kind([] { exact_posterior_small(make_series(std::vector<double>(15, 1.0)), {}); },
                                  ErrorKind::kInvalidArgument, &msg));
  EXPECT_EQ(msg, "enumeration infeasible");
}

TEST(BcpTest, InputValidation) {
  EXPECT_TRUE(dltest::throws_kind([] { bcp_posterior(make_series({1.0, 2.0}), {}); }, ErrorKind::kInvalidArgument));
  std::string msg;
  EXPECT_TRUE(dltest::throws_kind([] { bcp_posterior(make_series({1.0, NAN, 2.0}), {}); },
                                  ErrorKind::kInvalidArgument, &msg));
  EXPECT_NE(msg.find("2021-03-02"), std::string::npos);
  ChangePointConfig bad;
  bad.iterations = bad.burn_in;
  EXPECT_TRUE(dltest::throws_kind([&] { bcp_posterior(make_series({1, 2, 3}), bad); }, ErrorKind::kInvalidArgument));
  bad = {};
  bad.p0 = 0.0;
  EXPECT_TRUE(dltest::throws_kind([&] { validate(bad); }, ErrorKind::kInvalidArgument));
  bad = {};
  bad.threshold = 1.0;
  EXPECT_TRUE(dltest::throws_kind([&] { validate(bad); }, ErrorKind::kInvalidArgument));
}

TEST(BcpTest, ConstantSeriesNoIntervals) {
  const auto r = bcp_posterior(make_series(std::vector<double>(40, 0.3)), {});
  for (double p : r.probabilities) EXPECT_LT(p, 0.6);
  EXPECT_TRUE(r.intervals.empty());
  for (double m : r.posterior_means) EXPECT_NEAR(m, 0.3, 1e-12);
}

TEST(BcpTest, StepSeries) {
  const auto values = step_values(30, 30, 0.2, 0.6, 0.01, 99);
  const auto r = bcp_posterior(make_series(values), {});
  EXPECT_GT(r.probabilities[30], 0.6);
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (i + 3 <= 30 || i >= 33) {
      EXPECT_LT(r.probabilities[i], 0.2) << i;
    }
  }
  ASSERT_EQ(r.intervals.size(), 1u);
  EXPECT_LE(r.intervals[0].first, 30u);
  EXPECT_GE(r.intervals[0].last, 30u);
}

TEST(BcpTest, SeedDeterminism) {
  const auto s = make_series(step_values(10, 10, 0, 1, 0.3, 1));
  ChangePointConfig cfg;
  cfg.seed = 77;
  const auto a = bcp_posterior(s, cfg);
  const auto b = bcp_posterior(s, cfg);
  EXPECT_EQ(a.probabilities, b.probabilities);
  EXPECT_EQ(a.posterior_means, b.posterior_means);
  cfg.seed = 78;
  EXPECT_NE(bcp_posterior(s, cfg).probabilities, a.probabilities);
  cfg.chains = 3;
  EXPECT_EQ(bcp_posterior(s, cfg).probabilities, bcp_posterior(s, cfg).probabilities);
}

TEST(BcpTest, AgreesWithEnumeration) {
  Rng rng(21);
  for (int n : {5, 8, 12}) {
    std::vector<double> v;
    for (int i = 0; i < n; ++i) v.push_back(rng.normal(i >= n / 2 ? 1.0 : 0.0, 0.6));
    ChangePointConfig cfg;
    cfg.iterations = 50000;
    cfg.burn_in = 500;
    cfg.seed = 5;
    const auto s = make_series(v);
    const auto sampled = bcp_posterior(s, cfg);
    const auto exact = exact_posterior_small(s, cfg);
    EXPECT_LT(max_abs_diff(sampled.probabilities, exact.probabilities), 0.02) << "T=" << n;
    EXPECT_LT(max_abs_diff(sampled.posterior_means, exact.posterior_means), 0.02) << "T=" << n;
  }
}

TEST(BcpTest, PosteriorMeansWithinRange) {
  Rng rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> v;
    for (int i = 0; i < 25; ++i) v.push_back(rng.normal(0, 1) * (1 + trial));
    ChangePointConfig cfg;
    cfg.iterations = 1000;
    cfg.burn_in = 100;
    const auto r = bcp_posterior(make_series(v), cfg);
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    for (double m : r.posterior_means) {
      EXPECT_GE(m, *lo - 1e-12);
      EXPECT_LE(m, *hi + 1e-12);
    }
  }
}

TEST(PartitionScorerTest, QuadratureFallbackAgrees) {
  // With every point its own block the closed form does not apply; check the
  // quadrature branch against the midpoint rule.
  const ChangePointConfig cfg;
  const detail::PartitionScorer scorer(4, 10.0, cfg);
  const double within = 1e-3, between = 9.999;
  const double got = scorer.log_weight(4, within, between) - scorer.log_weight(1, 10.0, 0.0);
  auto log_w_integral = [&](int b, double W, double B) {
    const int grid = 400000;
    double s = 0;
    for (int g = 0; g < grid; ++g) {
      const double w = cfg.w0 * (g + 0.5) / grid;
      s += std::pow(w, 0.5 * (b - 1)) / std::pow(W + B * w, 1.5);
    }
    return std::log(s * cfg.w0 / grid);
  };
  auto log_p_integral = [&](int b) {
    const int grid = 400000;
    double s = 0;
    for (int g = 0; g < grid; ++g) {
      const double p = cfg.p0 * (g + 0.5) / grid;
      s += std::pow(p, b - 1) * std::pow(1 - p, 4 - b);
    }
    return std::log(s * cfg.p0 / grid);
  };
  const double expected =
      (log_p_integral(4) + log_w_integral(4, within, between)) - (log_p_integral(1) + log_w_integral(1, 10.0, 0.0));
  EXPECT_NEAR(got, expected, 1e-5);
}
