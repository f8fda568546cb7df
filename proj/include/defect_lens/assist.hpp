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

#ifndef DEFECT_LENS_ASSIST_HPP
#define DEFECT_LENS_ASSIST_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "defect_lens/types.hpp"

namespace defect_lens {

/// Wave-level survey averages: covariate a_t (hesitancy) and response b_t
/// (uptake), both proportions. Sample sizes are optional and only needed for
/// model-assisted estimation.
struct PairedSeries {
  std::vector<Date> dates;
  std::vector<double> covariate;
  std::vector<double> response;
  std::vector<std::int64_t> sample_sizes;  // empty or same length as dates

  std::size_t size() const { return dates.size(); }
};

void validate(const PairedSeries& data);

struct BetaParams {
  double beta0 = 0.0;
  double beta1 = 0.0;
  double phi = 1.0;
};

struct BetaFit {
  double beta0 = 0.0;
  double beta1 = 0.0;
  double phi = 1.0;
  double loglik = 0.0;
  bool converged = false;
  double pseudo_r2 = 0.0;
  int iterations = 0;
  /// Max-norm of the gradient in (beta0, beta1, phi) at the returned point.
  double gradient_norm = 0.0;
  /// Standard errors from the inverse observed information; NaN when the
  /// information matrix is singular.
  std::array<double, 3> std_errors{};
  bool intercept_only = false;
  /// Log-likelihood after every accepted iterate, starting with the initial
  /// point. Filled only when requested.
  std::vector<double> loglik_trace;
};

struct FitOptions {
  int max_iterations = 200;
  double gradient_tolerance = 1e-6;
  bool record_trace = false;
};

/// Compresses responses at 0 or 1 into the open interval: (y (T - 1) + 0.5) / T.
std::vector<double> compress_boundary(std::span<const double> values);

/// Mean-precision beta log-likelihood with logit link. Responses must lie in (0, 1).
double beta_loglik(const BetaParams& params, std::span<const double> covariate,
                   std::span<const double> response);
double beta_loglik(const BetaParams& params, const PairedSeries& data);

/// Analytic gradient with respect to (beta0, beta1, phi).
std::array<double, 3> beta_loglik_gradient(const BetaParams& params, std::span<const double> covariate,
                                           std::span<const double> response);

/// Maximum likelihood fit by Newton iterations on (beta0, beta1, log phi)
/// with step halving. Starts from OLS on logit(b) and a moment estimate of
/// phi. A fit that stops at the iteration cap reports converged = false with
/// the best point found.
BetaFit fit_beta_regression(const PairedSeries& data, const FitOptions& options = {});

double logistic(double x);
double logit(double p);

/// Covariate value whose fitted mean equals response_mean.
double invert_mean(const BetaFit& fit, double response_mean);

/// Fitted mean at covariate value a.
double fitted_mean(const BetaFit& fit, double a);

/// (n * sample_mean + (N - n) * predicted_nonsample_mean) / N.
double model_assisted_estimate(double sample_mean, std::int64_t sample_size,
                               double predicted_nonsample_mean, std::int64_t population_size);

enum class AssistDirection {
  /// Fit uptake on hesitancy and invert the fitted mean at benchmark uptake.
  kInvertUptakeModel,
  /// Fit hesitancy on uptake and evaluate the fitted mean at benchmark uptake.
  kDirectHesitancyModel,
};

struct AssistOptions {
  AssistDirection direction = AssistDirection::kInvertUptakeModel;
  std::vector<double> factors;  // empty means default_sensitivity_factors()
  FitOptions fit;
};

struct AssistRow {
  Date date{};
  Date probability_wave{};
  Date benchmark_date{};
  double benchmark_uptake = 0.0;
  double predicted_hesitancy = 0.0;       // model prediction for unsampled units
  double original_estimate = 0.0;         // target survey hesitancy
  double assisted_estimate = 0.0;         // target survey, model-assisted
  double reference_estimate = 0.0;        // probability survey, model-assisted (plays Ybar_N)
  std::vector<Decomposition> original;    // one per factor
  std::vector<Decomposition> assisted;    // one per factor
};

struct AssistResult {
  BetaFit fit;
  std::vector<double> factors;
  std::vector<AssistRow> rows;
  std::vector<Date> unmatched_dates;
  std::vector<std::string> warnings;
};

/// Model-assisted hesitancy pipeline. The probability survey's series is
/// fitted; both surveys get model-assisted estimates from the uptake
/// benchmark; the probability survey's assisted value is the reference the
/// target survey (original and assisted) is decomposed against. Dates of the
/// target survey are joined to the latest probability wave and benchmark on or
/// before them.
AssistResult assisted_series(const PairedSeries& target, const PairedSeries& probability,
                             std::span<const BenchmarkPoint> uptake_benchmark,
                             const AssistOptions& options = {});

}  // namespace defect_lens

#endif  // DEFECT_LENS_ASSIST_HPP
