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

#include "defect_lens/assist.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>

#include "defect_lens/decomp.hpp"
#include "defect_lens/error.hpp"
#include "defect_lens/io.hpp"

namespace defect_lens {

namespace {

using boost::math::digamma;
using boost::math::trigamma;

// Precision used when the likelihood is unbounded in phi (responses lie
// exactly on a logit-affine curve).
constexpr double kPrecisionCap = 1e12;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Per-point pieces shared by the gradient and Hessian.
struct PointTerms {
  double mu;
  double g;         // dmu/deta = mu (1 - mu)
  double resid;     // y* - mu*, y* = logit(b), mu* = psi(mu phi) - psi((1 - mu) phi)
  double dphi;      // d loglik / d phi
  double tri_a;     // psi'(mu phi)
  double tri_b;     // psi'((1 - mu) phi)
};

PointTerms point_terms(double eta, double phi, double b) {
  PointTerms t{};
  t.mu = logistic(eta);
  t.g = t.mu * (1.0 - t.mu);
  const double a_shape = t.mu * phi;
  const double b_shape = (1.0 - t.mu) * phi;
  const double psi_a = digamma(a_shape);
  const double psi_b = digamma(b_shape);
  const double log_b = std::log(b);
  const double log_1mb = std::log1p(-b);
  t.resid = (log_b - log_1mb) - (psi_a - psi_b);
  t.dphi = digamma(phi) - t.mu * psi_a - (1.0 - t.mu) * psi_b + t.mu * log_b + (1.0 - t.mu) * log_1mb;
  t.tri_a = trigamma(a_shape);
  t.tri_b = trigamma(b_shape);
  return t;
}

void check_response(std::span<const double> response) {
  for (double b : response) {
    if (!(b > 0.0 && b < 1.0)) {
      fail(ErrorKind::kDomain, "beta likelihood: response " + format_number(b) +
                                   " is not in the open interval (0, 1); compress boundary values first");
    }
  }
}

struct Problem {
  std::span<const double> covariate;
  std::span<const double> response;
  bool intercept_only;
};

double loglik_at(const Problem& p, double beta0, double beta1, double phi) {
  return beta_loglik({beta0, p.intercept_only ? 0.0 : beta1, phi}, p.covariate, p.response);
}

// Gradient and Hessian in natural parameters (beta0, beta1, phi).
void derivatives(const Problem& p, double beta0, double beta1, double phi, double grad[3], double hess[3][3]) {
  for (int i = 0; i < 3; ++i) {
    grad[i] = 0.0;
    for (int j = 0; j < 3; ++j) hess[i][j] = 0.0;
  }
  const double tri_phi = trigamma(phi);
  for (std::size_t t = 0; t < p.response.size(); ++t) {
    const double x[2] = {1.0, p.intercept_only ? 0.0 : p.covariate[t]};
    const PointTerms pt = point_terms(beta0 + beta1 * x[1], phi, p.response[t]);
    const double d_eta = phi * pt.resid * pt.g;
    const double d2_eta = phi * (-phi * (pt.tri_a + pt.tri_b) * pt.g * pt.g + pt.resid * pt.g * (1.0 - 2.0 * pt.mu));
    const double d_eta_phi = pt.resid * pt.g - phi * pt.g * (pt.mu * pt.tri_a - (1.0 - pt.mu) * pt.tri_b);
    const double d2_phi = tri_phi - pt.mu * pt.mu * pt.tri_a - (1.0 - pt.mu) * (1.0 - pt.mu) * pt.tri_b;
    for (int i = 0; i < 2; ++i) {
      grad[i] += d_eta * x[i];
      for (int j = 0; j < 2; ++j) hess[i][j] += d2_eta * x[i] * x[j];
      hess[i][2] += d_eta_phi * x[i];
    }
    grad[2] += pt.dphi;
    hess[2][2] += d2_phi;
  }
  hess[2][0] = hess[0][2];
  hess[2][1] = hess[1][2];
}

// Solves A x = b for symmetric positive definite A restricted to the listed
// indices. Returns false when A is not positive definite.
bool cholesky_solve(const double a_in[3][3], const double b_in[3], const int* idx, int k, double x_out[3]) {
  double l[3][3] = {};
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = a_in[idx[i]][idx[j]];
      for (int m = 0; m < j; ++m) s -= l[i][m] * l[j][m];
      if (i == j) {
        if (!(s > 0.0)) return false;
        l[i][i] = std::sqrt(s);
      } else {
        l[i][j] = s / l[j][j];
      }
    }
  }
  double y[3] = {};
  for (int i = 0; i < k; ++i) {
    double s = b_in[idx[i]];
    for (int m = 0; m < i; ++m) s -= l[i][m] * y[m];
    y[i] = s / l[i][i];
  }
  double x[3] = {};
  for (int i = k - 1; i >= 0; --i) {
    double s = y[i];
    for (int m = i + 1; m < k; ++m) s -= l[m][i] * x[m];
    x[i] = s / l[i][i];
  }
  for (int i = 0; i < 3; ++i) x_out[i] = 0.0;
  for (int i = 0; i < k; ++i) x_out[idx[i]] = x[i];
  return true;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return kNaN;
  return sxy / std::sqrt(sxx * syy);
}

double pseudo_r2(std::span<const double> covariate, std::span<const double> response, double beta0,
                 double beta1) {
  std::vector<double> observed(response.size());
  std::vector<double> predictor(response.size());
  for (std::size_t t = 0; t < response.size(); ++t) {
    observed[t] = logit(response[t]);
    predictor[t] = beta0 + beta1 * covariate[t];
  }
  const double r = pearson(observed, predictor);
  if (std::isnan(r)) {
    // A constant response is reproduced exactly by a flat predictor.
    const bool observed_flat = std::all_of(observed.begin(), observed.end(),
                                           [&](double v) { return v == observed.front(); });
    return observed_flat ? 1.0 : 0.0;
  }
  return std::clamp(r * r, 0.0, 1.0);
}

}  // namespace

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double logit(double p) { return std::log(p) - std::log1p(-p); }

void validate(const PairedSeries& data) {
  require(data.covariate.size() == data.size() && data.response.size() == data.size(),
          "paired series: columns must have equal lengths");
  require(data.sample_sizes.empty() || data.sample_sizes.size() == data.size(),
          "paired series: sample sizes must match the number of dates");
  require(data.size() >= 3, "paired series: at least 3 points are required");
  for (std::size_t i = 1; i < data.size(); ++i) {
    require(data.dates[i - 1] < data.dates[i], "paired series: dates must be strictly increasing");
  }
}

std::vector<double> compress_boundary(std::span<const double> values) {
  const double t = static_cast<double>(values.size());
  std::vector<double> out(values.begin(), values.end());
  for (double& y : out) y = (y * (t - 1.0) + 0.5) / t;
  return out;
}

double beta_loglik(const BetaParams& params, std::span<const double> covariate, std::span<const double> response) {
  require(params.phi > 0.0, "beta likelihood: phi must be positive");
  require(covariate.size() == response.size(), "beta likelihood: covariate and response lengths differ");
  check_response(response);
  const double lg_phi = std::lgamma(params.phi);
  double total = 0.0;
  for (std::size_t t = 0; t < response.size(); ++t) {
    const double mu = logistic(params.beta0 + params.beta1 * covariate[t]);
    const double a = mu * params.phi;
    const double b = (1.0 - mu) * params.phi;
    total += lg_phi - std::lgamma(a) - std::lgamma(b) + (a - 1.0) * std::log(response[t]) +
             (b - 1.0) * std::log1p(-response[t]);
  }
  return total;
}

double beta_loglik(const BetaParams& params, const PairedSeries& data) {
  return beta_loglik(params, data.covariate, data.response);
}

std::array<double, 3> beta_loglik_gradient(const BetaParams& params, std::span<const double> covariate,
                                           std::span<const double> response) {
  require(params.phi > 0.0, "beta likelihood: phi must be positive");
  require(covariate.size() == response.size(), "beta likelihood: covariate and response lengths differ");
  check_response(response);
  std::array<double, 3> grad{};
  for (std::size_t t = 0; t < response.size(); ++t) {
    const PointTerms pt = point_terms(params.beta0 + params.beta1 * covariate[t], params.phi, response[t]);
    const double d_eta = params.phi * pt.resid * pt.g;
    grad[0] += d_eta;
    grad[1] += d_eta * covariate[t];
    grad[2] += pt.dphi;
  }
  return grad;
}

BetaFit fit_beta_regression(const PairedSeries& data, const FitOptions& options) {
  validate(data);
  for (double a : data.covariate) require(std::isfinite(a), "beta regression: covariate must be finite");
  for (double b : data.response) {
    require(b >= 0.0 && b <= 1.0, "beta regression: response must lie in [0, 1]");
  }
  const bool at_boundary = std::any_of(data.response.begin(), data.response.end(),
                                       [](double b) { return b == 0.0 || b == 1.0; });
  const std::vector<double> response =
      at_boundary ? compress_boundary(data.response) : std::vector<double>(data.response);
  const std::span<const double> covariate(data.covariate);

  const bool flat_covariate = std::all_of(covariate.begin(), covariate.end(),
                                          [&](double a) { return a == covariate.front(); });
  const Problem problem{covariate, response, flat_covariate};
  const double t_count = static_cast<double>(response.size());

  // OLS of logit(b) on a.
  std::vector<double> z(response.size());
  for (std::size_t t = 0; t < z.size(); ++t) z[t] = logit(response[t]);
  double beta0 = 0.0;
  double beta1 = 0.0;
  {
    double mz = 0.0, ma = 0.0;
    for (std::size_t t = 0; t < z.size(); ++t) {
      mz += z[t];
      ma += covariate[t];
    }
    mz /= t_count;
    ma /= t_count;
    if (!flat_covariate) {
      double saz = 0.0, saa = 0.0;
      for (std::size_t t = 0; t < z.size(); ++t) {
        saz += (covariate[t] - ma) * (z[t] - mz);
        saa += (covariate[t] - ma) * (covariate[t] - ma);
      }
      beta1 = saz / saa;
    }
    beta0 = mz - beta1 * ma;
  }
  const double k_params = flat_covariate ? 1.0 : 2.0;
  double rss = 0.0;
  for (std::size_t t = 0; t < z.size(); ++t) {
    const double e = z[t] - (beta0 + beta1 * covariate[t]);
    rss += e * e;
  }

  BetaFit fit;
  fit.intercept_only = flat_covariate;

  if (rss == 0.0) {
    // logit(b) is exactly affine in a: the likelihood grows without bound in
    // phi, so there is no maximizer to converge to.
    fit.beta0 = beta0;
    fit.beta1 = beta1;
    fit.phi = kPrecisionCap;
    fit.loglik = loglik_at(problem, beta0, beta1, kPrecisionCap);
    fit.converged = false;
    fit.iterations = 0;
    fit.pseudo_r2 = pseudo_r2(covariate, response, beta0, beta1);
    fit.std_errors = {kNaN, kNaN, kNaN};
    double grad[3], hess[3][3];
    derivatives(problem, beta0, beta1, kPrecisionCap, grad, hess);
    fit.gradient_norm = std::max({std::abs(grad[0]), flat_covariate ? 0.0 : std::abs(grad[1]), std::abs(grad[2])});
    if (options.record_trace) fit.loglik_trace.push_back(fit.loglik);
    return fit;
  }

  // Moment start for phi: mean of mu(1-mu)/var(b) - 1 with var(b) from the
  // logit-scale residual variance via the delta method.
  const double s2 = rss / std::max(1.0, t_count - k_params);
  double phi = 0.0;
  for (std::size_t t = 0; t < z.size(); ++t) {
    const double mu = logistic(beta0 + beta1 * covariate[t]);
    phi += 1.0 / (s2 * mu * (1.0 - mu));
  }
  phi = phi / t_count - 1.0;
  if (!(phi > 0.0) || !std::isfinite(phi)) phi = 1.0;
  phi = std::min(phi, kPrecisionCap);

  double loglik = loglik_at(problem, beta0, beta1, phi);
  if (options.record_trace) fit.loglik_trace.push_back(loglik);

  const int active_full[3] = {0, 1, 2};
  const int active_intercept[2] = {0, 2};
  const int* active = flat_covariate ? active_intercept : active_full;
  const int k = flat_covariate ? 2 : 3;

  auto grad_norm = [&](const double g[3]) {
    double m = 0.0;
    for (int i = 0; i < k; ++i) m = std::max(m, std::abs(g[active[i]]));
    return m;
  };

  int iter = 0;
  bool converged = false;
  double grad[3], hess[3][3];
  for (;;) {
    derivatives(problem, beta0, beta1, phi, grad, hess);
    if (grad_norm(grad) < options.gradient_tolerance) {
      converged = true;
      break;
    }
    if (iter >= options.max_iterations) break;

    // Newton step in (beta0, beta1, log phi).
    double g_theta[3] = {grad[0], grad[1], grad[2] * phi};
    double neg_h[3][3];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) neg_h[i][j] = -hess[i][j];
    for (int i = 0; i < 2; ++i) {
      neg_h[i][2] *= phi;
      neg_h[2][i] *= phi;
    }
    neg_h[2][2] = -(phi * phi * hess[2][2] + phi * grad[2]);
    double step[3];
    const bool newton = cholesky_solve(neg_h, g_theta, active, k, step);
    if (!newton) {
      // Not concave here: fall back to a scaled gradient step.
      double m = 0.0;
      for (int i = 0; i < k; ++i) m = std::max(m, std::abs(g_theta[active[i]]));
      for (int i = 0; i < 3; ++i) step[i] = g_theta[i] / std::max(1.0, m);
      if (flat_covariate) step[1] = 0.0;
    }

    // Close to the optimum the predicted gain drops below the rounding noise
    // of the lgamma sums, and a line search would only follow that noise.
    double predicted_gain = 0.0;
    for (int i = 0; i < k; ++i) predicted_gain += 0.5 * g_theta[active[i]] * step[active[i]];
    const double noise = 1e-10 * std::max(1.0, std::abs(loglik));
    const bool below_noise = newton && predicted_gain < noise;

    double scale = 1.0;
    bool accepted = false;
    for (int halving = 0; halving < 60; ++halving, scale *= 0.5) {
      const double nb0 = beta0 + scale * step[0];
      const double nb1 = beta1 + scale * step[1];
      const double nphi = phi * std::exp(scale * step[2]);
      if (!(nphi > 0.0) || !std::isfinite(nphi) || nphi > kPrecisionCap) continue;
      double candidate = 0.0;
      try {
        candidate = loglik_at(problem, nb0, nb1, nphi);
      } catch (const Error&) {
        continue;
      }
      if (std::isfinite(candidate) && (candidate >= loglik || (below_noise && candidate >= loglik - noise))) {
        beta0 = nb0;
        beta1 = nb1;
        phi = nphi;
        loglik = candidate;
        accepted = true;
        break;
      }
    }
    ++iter;
    if (!accepted) break;
    if (options.record_trace) fit.loglik_trace.push_back(loglik);
  }

  fit.beta0 = beta0;
  fit.beta1 = beta1;
  fit.phi = phi;
  fit.loglik = loglik;
  fit.converged = converged;
  fit.iterations = iter;
  fit.gradient_norm = grad_norm(grad);
  fit.pseudo_r2 = pseudo_r2(covariate, response, beta0, beta1);

  // Standard errors from the inverse observed information.
  fit.std_errors = {kNaN, kNaN, kNaN};
  double info[3][3];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) info[i][j] = -hess[i][j];
  for (int col = 0; col < k; ++col) {
    double e[3] = {0.0, 0.0, 0.0};
    e[active[col]] = 1.0;
    double x[3];
    if (!cholesky_solve(info, e, active, k, x)) break;
    fit.std_errors[active[col]] = std::sqrt(x[active[col]]);
  }
  if (flat_covariate) fit.std_errors[1] = kNaN;
  return fit;
}

double invert_mean(const BetaFit& fit, double response_mean) {
  if (fit.beta1 == 0.0) fail(ErrorKind::kDomain, "non-invertible flat model");
  require(response_mean > 0.0 && response_mean < 1.0, "invert_mean: response mean must lie in (0, 1)");
  return (logit(response_mean) - fit.beta0) / fit.beta1;
}

double fitted_mean(const BetaFit& fit, double a) { return logistic(fit.beta0 + fit.beta1 * a); }

double model_assisted_estimate(double sample_mean, std::int64_t sample_size, double predicted_nonsample_mean,
                               std::int64_t population_size) {
  require(population_size >= 1, "model_assisted_estimate: population size must be positive");
  require(sample_size >= 0 && sample_size <= population_size,
          "model_assisted_estimate: requires 0 <= n <= N");
  const double n = static_cast<double>(sample_size);
  const double rest = static_cast<double>(population_size - sample_size);
  return (n * sample_mean + rest * predicted_nonsample_mean) / static_cast<double>(population_size);
}

AssistResult assisted_series(const PairedSeries& target, const PairedSeries& probability,
                             std::span<const BenchmarkPoint> uptake_benchmark, const AssistOptions& options) {
  validate(target);
  validate(probability);
  require(target.sample_sizes.size() == target.size(), "assisted series: target survey needs sample sizes");
  require(probability.sample_sizes.size() == probability.size(),
          "assisted series: probability survey needs sample sizes");
  require(!uptake_benchmark.empty(), "assisted series: benchmark is empty");

  AssistResult result;
  result.factors = options.factors.empty() ? default_sensitivity_factors() : options.factors;

  PairedSeries model_data = probability;
  if (options.direction == AssistDirection::kDirectHesitancyModel) {
    std::swap(model_data.covariate, model_data.response);
  }
  result.fit = fit_beta_regression(model_data, options.fit);

  std::vector<Date> bench_dates;
  for (const auto& b : uptake_benchmark) bench_dates.push_back(b.date);

  for (std::size_t i = 0; i < target.size(); ++i) {
    const Date& date = target.dates[i];
    const std::ptrdiff_t j = latest_on_or_before(probability.dates, date);
    const std::ptrdiff_t k = latest_on_or_before(bench_dates, date);
    if (j < 0 || k < 0) {
      result.unmatched_dates.push_back(date);
      continue;
    }
    const BenchmarkPoint& bench = uptake_benchmark[static_cast<std::size_t>(k)];
    AssistRow row;
    row.date = date;
    row.probability_wave = probability.dates[static_cast<std::size_t>(j)];
    row.benchmark_date = bench.date;
    row.benchmark_uptake = bench.population_mean;

    double predicted = options.direction == AssistDirection::kInvertUptakeModel
                           ? invert_mean(result.fit, bench.population_mean)
                           : fitted_mean(result.fit, bench.population_mean);
    if (predicted < 0.0 || predicted > 1.0) {
      result.warnings.push_back(format_date(date) + ": predicted hesitancy " + format_number(predicted) +
                                " clamped to [0, 1]");
      predicted = std::clamp(predicted, 0.0, 1.0);
    }
    row.predicted_hesitancy = predicted;
    row.original_estimate = target.covariate[i];
    row.assisted_estimate =
        model_assisted_estimate(target.covariate[i], target.sample_sizes[i], predicted, bench.population_size);
    const auto pj = static_cast<std::size_t>(j);
    row.reference_estimate = model_assisted_estimate(probability.covariate[pj], probability.sample_sizes[pj],
                                                     predicted, bench.population_size);

    const BenchmarkPoint reference = make_binary_benchmark(date, bench.population_size, row.reference_estimate);
    SurveySnapshot original{date, target.sample_sizes[i], row.original_estimate, "original"};
    SurveySnapshot assisted{date, target.sample_sizes[i], row.assisted_estimate, "assisted"};
    row.original = sensitivity_sweep(original, reference, result.factors);
    row.assisted = sensitivity_sweep(assisted, reference, result.factors);
    result.rows.push_back(std::move(row));
  }
  if (result.rows.empty()) fail(ErrorKind::kInvalidArgument, "assisted series: empty date intersection");
  return result;
}

}  // namespace defect_lens
