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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero when any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "defect_lens/assist.hpp"
#include "defect_lens/changepoint.hpp"
#include "defect_lens/decomp.hpp"
#include "defect_lens/estimands.hpp"
#include "defect_lens/pipeline.hpp"
#include "defect_lens/report.hpp"
#include "defect_lens/rng.hpp"
#include "defect_lens/simlab.hpp"
#include "support.hpp"

using namespace defect_lens;
using namespace std::chrono;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

double seconds_since(steady_clock::time_point start) {
  return duration<double>(steady_clock::now() - start).count();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size();
  return m % 2 ? v[m / 2] : 0.5 * (v[m / 2 - 1] + v[m / 2]);
}

// 1. The error identity holds to rounding on random populations.
Verdict identity_suite() {
  const auto start = steady_clock::now();
  Rng rng(101);
  int checked = 0, attempts = 0;
  double worst = 0.0;
  int by_mechanism[3] = {0, 0, 0};
  int continuous = 0;
  while (checked < 1000 && attempts < 5000) {
    ++attempts;
    const auto size = static_cast<std::int64_t>(10 + rng.uniform_index(9991));
    const bool is_continuous = rng.uniform() < 0.5;
    const FinitePopulation pop =
        is_continuous ? generate_continuous_population(size, rng.normal(0, 5), 0.1 + rng.uniform() * 10, rng.next_u64())
                      : generate_population(size, 0.05 + 0.9 * rng.uniform(), std::nullopt, rng.next_u64());
    const int kind = static_cast<int>(rng.uniform_index(3));
    SelectionMechanism mech;
    if (kind == 0) {
      mech = SrsSelection{1 + static_cast<std::int64_t>(rng.uniform_index(static_cast<std::uint64_t>(size - 1)))};
    } else if (kind == 1) {
      mech = LogisticSelection{rng.normal(-1, 1), rng.normal(0, 1)};
    } else {
      FixedSetSelection fixed;
      const auto k = 1 + rng.uniform_index(static_cast<std::uint64_t>(size - 1));
      std::vector<std::size_t> idx(static_cast<std::size_t>(size));
      for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
      rng.shuffle(std::span<std::size_t>(idx));
      fixed.indices.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k));
      mech = fixed;
    }
    FinitePopulation sample;
    double residual = 0.0;
    try {
      sample = apply_selection(pop, mech, rng.next_u64());
      residual = verify_identity(sample);
    } catch (const Error&) {
      continue;  // all or nothing recorded, or constant outcome
    }
    worst = std::max(worst, std::fabs(residual));
    ++checked;
    ++by_mechanism[kind];
    continuous += is_continuous;
  }
  const double elapsed = seconds_since(start);
  const bool all_kinds = by_mechanism[0] > 0 && by_mechanism[1] > 0 && by_mechanism[2] > 0 && continuous > 0 &&
                         continuous < checked;
  return {checked >= 1000 && worst < 1e-10 && elapsed < 10.0 && all_kinds,
          fmt("%d populations (srs %d, logistic %d, fixed %d; continuous %d), max |residual| %.2e, %.2f s", checked,
              by_mechanism[0], by_mechanism[1], by_mechanism[2], continuous, worst, elapsed)};
}

// 2. US row of the national comparison table.
Verdict us_row() {
  const auto start = steady_clock::now();
  const Decomposition d = decompose({{}, 234000, 0.5292, ""}, make_binary_benchmark({}, 255000000, 0.4007));
  const double elapsed = seconds_since(start);
  const bool ok = std::fabs(d.data_deficiency - 33.0) <= 0.5 && std::fabs(d.problem_difficulty - 0.490) <= 0.001 &&
                  d.ddc >= 0.0075 && d.ddc <= 0.0083 && d.n_eff_approx >= 13 && d.n_eff_approx <= 17 &&
                  elapsed < 1.0;
  return {ok, fmt("deficiency %.3f, difficulty %.4f, ddc %.5f, n_eff %.2f, %.4f s", d.data_deficiency,
                  d.problem_difficulty, d.ddc, d.n_eff_approx, elapsed)};
}

// 3. India row: n chosen so the deficiency is 224.
Verdict india_row() {
  const std::int64_t big_n = 1380000000;
  const auto n = static_cast<std::int64_t>(std::llround(static_cast<double>(big_n) / (1.0 + 224.0 * 224.0)));
  const double deficiency = data_deficiency(n, big_n);
  const double neff = effective_sample_size_approx(0.0040, n, big_n);
  const double difficulty = make_binary_benchmark({}, big_n, 0.3324).population_sd;
  const bool ok = std::fabs(deficiency - 224.0) < 0.01 && neff >= 1 && neff <= 3 && std::fabs(difficulty - 0.471) <= 0.001;
  return {ok, fmt("deficiency %.3f, n_eff %.3f, difficulty %.4f", deficiency, neff, difficulty)};
}

// 4. The Monte Carlo SRS error at n_eff matches the observed squared error.
Verdict neff_semantics() {
  const auto start = steady_clock::now();
  const std::int64_t big_n = 100000;
  const FinitePopulation pop = generate_population(big_n, 0.4, std::nullopt, 4);
  const BenchmarkPoint bench = population_benchmark(pop);
  // Logistic recording near 5% with a slight tilt toward Y = 1. The realized
  // ddc is random, so the first seed whose |ddc| lands near 0.005 is used.
  const double beta = 0.045;
  const LogisticSelection mech{logit(0.05) - 0.4 * beta, beta};
  for (std::uint64_t seed = 1; seed <= 500; ++seed) {
    const FinitePopulation sample = apply_selection(pop, mech, seed);
    const double ddc = exact_ddc(sample);
    if (std::fabs(std::fabs(ddc) - 0.005) > 0.0005) continue;
    const Decomposition d = decompose(recorded_snapshot(sample), bench);
    const double observed = d.estimation_error * d.estimation_error;
    const auto n_srs = static_cast<std::int64_t>(std::llround(d.n_eff_exact));
    const double mc = mc_mse_srs(pop, n_srs, 1000, derive_seed(seed, 99));
    const double rel = std::fabs(mc - observed) / observed;
    const double elapsed = seconds_since(start);
    return {rel <= 0.15 && elapsed < 30.0,
            fmt("selection seed %llu: ddc %.5f, n %lld, n_eff %.1f, observed sq. error %.4e, MC %.4e "
                "(rel. gap %.3f), %.2f s",
                static_cast<unsigned long long>(seed), ddc, static_cast<long long>(recorded_snapshot(sample).sample_size),
                d.n_eff_exact, observed, mc, rel, elapsed)};
  }
  return {false, "no selection seed in 1..500 gave |ddc| within 0.0005 of 0.005"};
}

// 5. Difference estimand on constructed series with a stable ddc.
Verdict difference_gain() {
  Rng rng(55);
  const std::int64_t big_n = 255000000, n = 250000;
  const double deficiency = data_deficiency(n, big_n);
  double min_ratio = kInfinity, worst_gap = 0.0;
  int pairs = 0;
  for (int series = 0; series < 50; ++series) {
    const double level = 0.002 + 0.02 * rng.uniform();
    double mean = 0.2 + 0.4 * rng.uniform();
    double ddc = level;
    Wave prev;
    for (int t = 0; t < 20; ++t) {
      const BenchmarkPoint b = make_binary_benchmark(sys_days{year{2021} / 1 / 1} + days{7 * t}, big_n, mean);
      const double ybar_n = mean + ddc * deficiency * b.population_sd;
      const Wave curr{{b.date, n, ybar_n, ""}, b};
      if (t > 0) {
        const WavePair p{prev, curr};
        const double neff = diff_neff(p);
        const double level_neff = decompose(curr.survey, curr.bench).n_eff_approx;
        min_ratio = std::min(min_ratio, neff / level_neff);
        const double d_prev = decompose(prev.survey, prev.bench).ddc;
        const double d_curr = decompose(curr.survey, curr.bench).ddc;
        worst_gap = std::max(worst_gap, dltest::relative_gap(neff, diff_neff_decomposed(d_prev, d_curr, p)));
        ++pairs;
      }
      prev = curr;
      mean = std::clamp(mean + rng.normal(0, 0.005), 0.05, 0.95);
      // Every wave within 5% of the level, so consecutive waves differ by at most 10%.
      ddc = level * (1.0 + 0.05 * (2.0 * rng.uniform() - 1.0));
    }
  }
  const BenchmarkPoint b0 = make_binary_benchmark(sys_days{year{2021} / 1 / 1}, big_n, 0.3);
  const BenchmarkPoint b1 = make_binary_benchmark(sys_days{year{2021} / 1 / 8}, big_n, 0.3);
  const Wave w0{{b0.date, n, 0.35, ""}, b0};
  const Wave w1{{b1.date, n, 0.35, ""}, b1};
  const double identical = diff_neff({w0, w1});
  const bool ok = min_ratio >= 50.0 && std::isinf(identical) && identical > 0 && worst_gap <= 1e-10;
  return {ok, fmt("%d wave pairs, min diff/level n_eff ratio %.1f, identical waves n_eff %s, two-path gap %.1e", pairs,
                  min_ratio, format_number(identical).c_str(), worst_gap)};
}

// 6. Subgroup contrast: exact SD against units, fixture discrepancy, identity.
Verdict subgroup() {
  Rng rng(66);
  double worst_sd = 0.0, worst_identity = 0.0;
  int tables = 0;
  while (tables < 100) {
    const double y = 0.05 + 0.9 * rng.uniform();
    const double g = 0.05 + 0.9 * rng.uniform();
    const double lo = std::max(0.0, y + g - 1.0), hi = std::min(y, g);
    const double p11 = lo + (hi - lo) * rng.uniform();
    const auto size = static_cast<std::int64_t>(200 + rng.uniform_index(5000));
    FinitePopulation pop;
    try {
      pop = generate_population(size, y, SubgroupSpec{g, p11}, rng.next_u64());
    } catch (const Error&) {
      continue;
    }
    double c11 = 0, c10 = 0, c01 = 0;
    for (std::size_t i = 0; i < pop.size(); ++i) {
      c11 += pop.outcomes[i] == 1 && pop.subgroup[i] == 1;
      c10 += pop.outcomes[i] == 1 && pop.subgroup[i] == 0;
      c01 += pop.outcomes[i] == 0 && pop.subgroup[i] == 1;
    }
    const double total = static_cast<double>(size);
    SubgroupTable t;
    t.p11 = c11 / total;
    t.p10 = c10 / total;
    t.p01 = c01 / total;
    t.p00 = 1.0 - t.p11 - t.p10 - t.p01;
    // Unit-level SD of the contrast, two-pass with denominator N.
    const auto ystar = subgroup_contrast(pop);
    long double mean = 0;
    for (double v : ystar) mean += v;
    mean /= total;
    long double ss = 0;
    for (double v : ystar) ss += (v - mean) * (v - mean);
    const double brute = std::sqrt(static_cast<double>(ss / total));
    worst_sd = std::max(worst_sd, std::fabs(subgroup_sigma(t, SigmaMethod::kExact) - brute));
    try {
      const FinitePopulation sample = apply_selection(pop, LogisticSelection{rng.normal(-1, 0.5), rng.normal(0, 1)},
                                                      rng.next_u64());
      worst_identity = std::max(worst_identity, std::fabs(verify_subgroup_identity(sample)));
    } catch (const Error&) {
    }
    ++tables;
  }
  SubgroupTable fixture;
  fixture.p11 = 3.0 / 8;
  fixture.p10 = 1.0 / 8;
  fixture.p01 = 2.0 / 8;
  fixture.p00 = 2.0 / 8;
  const double exact_var = std::pow(subgroup_sigma(fixture, SigmaMethod::kExact), 2);
  const double closed_var = std::pow(subgroup_sigma(fixture, SigmaMethod::kPaper), 2);
  const bool ok = worst_sd <= 1e-12 && std::fabs(exact_var - 0.4375) < 1e-12 && std::fabs(closed_var - 1.4375) < 1e-12 &&
                  worst_identity < 1e-10;
  return {ok, fmt("%d tables, max |exact - unit SD| %.1e; fixture variances %.4f (exact) vs %.4f (closed form); "
                  "max identity residual %.1e",
                  tables, worst_sd, exact_var, closed_var, worst_identity)};
}

PairedSeries beta_series(double b0, double b1, double phi, int count, std::uint64_t seed) {
  Rng rng(seed);
  PairedSeries s;
  const sys_days start = year{2021} / 1 / 1;
  for (int t = 0; t < count; ++t) {
    const double x = rng.uniform();
    const double mu = logistic(b0 + b1 * x);
    s.dates.push_back(start + days{t});
    s.covariate.push_back(x);
    s.response.push_back(std::clamp(rng.beta(mu * phi, (1 - mu) * phi), 1e-12, 1 - 1e-12));
  }
  return s;
}

// 7. Beta regression recovery, gradient check and pseudo-R^2.
Verdict beta_regression() {
  int covered = 0, converged = 0;
  for (int r = 0; r < 100; ++r) {
    const BetaFit fit = fit_beta_regression(beta_series(-1, 2, 50, 200, derive_seed(7, r)));
    converged += fit.converged;
    const bool in0 = std::fabs(fit.beta0 + 1) <= 3 * fit.std_errors[0];
    const bool in1 = std::fabs(fit.beta1 - 2) <= 3 * fit.std_errors[1];
    const bool in2 = std::fabs(fit.phi - 50) <= 3 * fit.std_errors[2];
    covered += fit.converged && in0 && in1 && in2;
  }
  // Analytic gradient against central differences with h = 1e-6.
  Rng rng(70);
  const PairedSeries data = beta_series(-1, 2, 50, 40, 71);
  double worst = 0.0;
  for (int k = 0; k < 200; ++k) {
    const BetaParams p{rng.normal(-1, 1), rng.normal(2, 1), std::exp(rng.normal(3, 0.7))};
    const auto g = beta_loglik_gradient(p, data.covariate, data.response);
    for (int j = 0; j < 3; ++j) {
      BetaParams up = p, down = p;
      double* u = j == 0 ? &up.beta0 : j == 1 ? &up.beta1 : &up.phi;
      double* dn = j == 0 ? &down.beta0 : j == 1 ? &down.beta1 : &down.phi;
      const double h = 1e-6;
      *u += h;
      *dn -= h;
      const double fd = (beta_loglik(up, data) - beta_loglik(down, data)) / (2 * h);
      worst = std::max(worst, std::fabs(g[j] - fd) / std::max(1.0, std::fabs(g[j])));
    }
  }
  // Affine-logit series with mild noise.
  Rng noise(72);
  PairedSeries affine;
  for (int t = 0; t < 30; ++t) {
    affine.dates.push_back(sys_days{year{2021} / 1 / 4} + days{7 * t});
    const double a = 0.7 - 0.02 * t;
    affine.covariate.push_back(a);
    affine.response.push_back(logistic(-0.2 - 2.5 * a + noise.normal(0, 0.05)));
  }
  const BetaFit af = fit_beta_regression(affine);
  const bool ok = covered >= 95 && worst < 1e-4 && af.pseudo_r2 > 0.8;
  return {ok, fmt("%d/100 replicates cover all three parameters within 3 SE (%d converged); max gradient gap %.1e; "
                  "affine-logit pseudo-R2 %.4f",
                  covered, converged, worst, af.pseudo_r2)};
}

std::vector<SeriesPoint> dated(const std::vector<double>& v) {
  std::vector<SeriesPoint> s;
  for (std::size_t i = 0; i < v.size(); ++i) s.push_back({sys_days{year{2021} / 3 / 1} + days{int(i)}, v[i]});
  return s;
}

// 8. Change points: sampler vs enumeration, step detection, determinism.
Verdict change_points() {
  const auto start = steady_clock::now();
  Rng rng(88);
  std::vector<double> small;
  for (int i = 0; i < 10; ++i) small.push_back(rng.normal(i < 5 ? 0.0 : 1.0, 0.7));
  ChangePointConfig cfg;
  cfg.iterations = 50000;
  cfg.burn_in = 500;
  cfg.seed = 8;
  const auto s10 = dated(small);
  const auto sampled = bcp_posterior(s10, cfg);
  const auto exact = exact_posterior_small(s10, cfg);
  double tv = 0.0;
  for (std::size_t i = 0; i < small.size(); ++i) {
    tv = std::max(tv, std::fabs(sampled.probabilities[i] - exact.probabilities[i]));
  }

  std::vector<double> step;
  for (int i = 0; i < 80; ++i) step.push_back((i < 40 ? 0.2 : 0.5) + rng.normal(0, 0.02));
  ChangePointConfig scfg;
  scfg.seed = 9;
  const auto detected = bcp_posterior(dated(step), scfg);
  bool contains = false, stray = false;
  for (const auto& iv : detected.intervals) {
    const bool has_step = iv.first <= 40 && iv.last >= 40;
    contains = contains || (has_step && detected.probabilities[40] > 0.6);
    if (!has_step && (iv.last + 3 <= 40 || iv.first >= 43)) stray = true;
  }
  const auto again = bcp_posterior(dated(step), scfg);
  const bool same = again.probabilities == detected.probabilities && again.posterior_means == detected.posterior_means &&
                    again.intervals == detected.intervals;
  const double elapsed = seconds_since(start);
  return {tv < 0.02 && contains && !stray && same && elapsed < 60.0,
          fmt("T=10 max |sampled - exact| %.4f; step interval found %s (P=%.3f), stray intervals %s; "
              "repeat run identical %s; %.2f s",
              tv, contains ? "yes" : "no", detected.probabilities[40], stray ? "yes" : "no", same ? "yes" : "no",
              elapsed)};
}

struct Linked {
  PairedSeries target, probability;
  std::vector<BenchmarkPoint> bench;
};

// Shared relation logit(uptake) = 1 - 4 * hesitancy; the large survey
// overstates uptake and understates hesitancy.
Linked linked(std::uint64_t seed) {
  Rng rng(seed);
  Linked l;
  const double hes_bias = -0.05 - 0.1 * rng.uniform();
  const double up_bias = 0.03 + 0.07 * rng.uniform();
  for (int t = 0; t < 20; ++t) {
    const Date d = sys_days{year{2021} / 1 / 4} + days{14 * t};
    const double uptake = 0.1 + 0.025 * t;
    const double hes = (1.0 - logit(uptake)) / 4.0;
    const double se_h = std::sqrt(hes * (1 - hes) / 1000), se_u = std::sqrt(uptake * (1 - uptake) / 1000);
    l.probability.dates.push_back(d);
    l.probability.covariate.push_back(std::clamp(hes + rng.normal(0, se_h), 0.01, 0.99));
    l.probability.response.push_back(std::clamp(uptake + rng.normal(0, se_u), 0.01, 0.99));
    l.probability.sample_sizes.push_back(1000);
    l.target.dates.push_back(d);
    l.target.covariate.push_back(std::clamp(hes + hes_bias + rng.normal(0, 0.003), 0.01, 0.99));
    l.target.response.push_back(std::clamp(uptake + up_bias + rng.normal(0, 0.003), 0.01, 0.99));
    l.target.sample_sizes.push_back(250000);
    l.bench.push_back(make_binary_benchmark(d, 255000000, uptake));
  }
  return l;
}

// 9. Model-assisted estimates improve on the raw large survey.
Verdict assisted() {
  int wins = 0;
  std::vector<double> orig_all, assisted_all;
  for (int r = 0; r < 100; ++r) {
    const Linked l = linked(derive_seed(9, r));
    const AssistResult res = assisted_series(l.target, l.probability, l.bench);
    std::vector<double> eo, ea, no, na;
    for (const auto& row : res.rows) {
      eo.push_back(std::fabs(row.original[2].estimation_error));
      ea.push_back(std::fabs(row.assisted[2].estimation_error));
      no.push_back(row.original[2].n_eff_approx);
      na.push_back(row.assisted[2].n_eff_approx);
    }
    const double meo = median(eo), mea = median(ea);
    orig_all.push_back(meo);
    assisted_all.push_back(mea);
    wins += mea < meo && median(na) > median(no);
  }
  return {wins >= 90, fmt("%d/100 replicates improve; median |error| original %.4f vs assisted %.4f", wins,
                          median(orig_all), median(assisted_all))};
}

// 10. Reports: bit-exact round trip, five default factors, deterministic output.
Verdict reports() {
  Rng rng(10);
  bool round_trip = true;
  for (int i = 0; i < 1000; ++i) {
    Decomposition d{rng.normal(), rng.normal() * 0.01, 1 + rng.uniform() * 300, rng.uniform() * 0.5,
                    i % 10 == 0 ? kInfinity : rng.uniform() * 1e5, i % 10 == 0 ? kInfinity : rng.uniform() * 1e5,
                    0.9 + 0.05 * (i % 5)};
    const auto text = to_json(d).dump(2);
    round_trip = round_trip && decomposition_from_json(nlohmann::ordered_json::parse(text)) == d;
  }
  std::vector<std::string> keys;
  for (double f : default_sensitivity_factors()) keys.push_back(factor_key(f));
  const bool five = keys == std::vector<std::string>{"0.9", "0.95", "1", "1.05", "1.1"};

  dltest::TempDir dir("acceptance");
  DecomposeRun dr;
  dr.survey = dir.write("s.csv", "date,n,ybar\n2021-01-09,250000,0.2\n2021-01-16,260000,0.26\n");
  dr.benchmark = dir.write("b.csv", "date,N,ybar\n2021-01-09,255000000,0.1\n2021-01-16,255000000,0.15\n");
  ChangePointRun cr;
  std::string values = "date,value\n";
  for (int i = 0; i < 30; ++i) values += format_date(sys_days{year{2021} / 3 / 1} + days{i}) + "," + (i < 15 ? "1" : "2.5") + "\n";
  cr.series = dir.write("v.csv", values);
  cr.config.seed = 4;
  SimulateRun sr;
  sr.population_size = 5000;
  sr.mechanism = LogisticSelection{-2, 0.5};
  sr.replicates = 30;
  bool same = true;
  const std::vector<std::function<Report()>> runs = {[&] { return run_decompose(dr); },
                                                     [&] { return run_changepoint(cr); },
                                                     [&] { return run_simulate(sr); }};
  std::size_t sweep_blocks = 0;
  for (const auto& run : runs) {
    const Report a = run(), b = run();
    same = same && a.json_text() == b.json_text();
    for (std::size_t t = 0; t < a.tables.size(); ++t) same = same && a.tables[t].to_csv() == b.tables[t].to_csv();
  }
  const Report decomposed = run_decompose(dr);
  for (const auto& row : decomposed.json["results"]["dates"]) sweep_blocks += row["sweep"].size();
  const bool ok = round_trip && five && same && sweep_blocks == 10;
  return {ok, fmt("round trip %s, default factor keys %s, sweep entries %zu for 2 dates, repeated runs identical %s",
                  round_trip ? "exact" : "MISMATCH", five ? "0.9/0.95/1/1.05/1.1" : "WRONG", sweep_blocks,
                  same ? "yes" : "no")};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
      {"identity suite", identity_suite},
      {"US national row", us_row},
      {"India national row", india_row},
      {"n_eff semantics", neff_semantics},
      {"difference estimand gain", difference_gain},
      {"subgroup contrast", subgroup},
      {"beta regression", beta_regression},
      {"change points", change_points},
      {"assisted estimation", assisted},
      {"reports and determinism", reports},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    failed += !v.pass;
    std::printf("AC%-2zu %s  %s: %s\n", i + 1, v.pass ? "PASS" : "FAIL", criteria[i].first, v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
