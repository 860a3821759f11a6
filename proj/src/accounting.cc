// Copyright 2026 The clusterdp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "clusterdp/accounting.h"

#include <algorithm>
#include <cmath>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace clusterdp {
namespace {

absl::Status CheckEpsTilde(double eps_tilde) {
  if (!(eps_tilde > 0) || !std::isfinite(eps_tilde)) {
    return absl::InvalidArgumentError("eps_tilde must be positive and finite");
  }
  return absl::OkStatus();
}

absl::Status CheckTargets(double target_eps, double target_delta) {
  if (!(target_eps > 0) || !std::isfinite(target_eps)) {
    return absl::InvalidArgumentError("target epsilon must be positive");
  }
  if (!(target_delta >= 0 && target_delta < 1)) {
    return absl::InvalidArgumentError("target delta must lie in [0, 1)");
  }
  return absl::OkStatus();
}

// log(1 + (1 - lambda) / (lambda gamma)).
ExtendedReal PureResamplingBudget(double lambda, double gamma) {
  if (lambda == 1) return 0.0;
  if (lambda == 0 || gamma == 0) return ExtendedReal::Infinity();
  return std::log1p((1 - lambda) / (lambda * gamma));
}

}  // namespace

ExtendedReal PriorBudget(double gamma, ExtendedReal sigma) {
  const ExtendedReal clip_route =
      gamma == 0 ? ExtendedReal::Infinity() : ExtendedReal(2 / gamma);
  return Min(sigma.Reciprocal(), clip_route);
}

PrivacyReport ClusterDpEpsDelta(const MechanismParams& params,
                                double eps_tilde) {
  PrivacyReport report;
  report.prior_budget = PriorBudget(params.gamma, params.sigma);
  report.resampling_budget = eps_tilde;
  report.epsilon = report.prior_budget + eps_tilde;
  const double lambda = params.lambda;
  report.delta = std::max(
      0.0, 1 - lambda - lambda * params.gamma * std::expm1(eps_tilde));
  return report;
}

ExtendedReal ClusterDpPureEps(const MechanismParams& params) {
  return PriorBudget(params.gamma, params.sigma) +
         PureResamplingBudget(params.lambda, params.gamma);
}

ExtendedReal UniformPriorEps(int num_outcomes, double lambda) {
  if (lambda == 0) return ExtendedReal::Infinity();
  return std::log1p((1 - lambda) * num_outcomes / lambda);
}

PrivacyReport UniformPriorEpsDelta(int num_outcomes, double lambda,
                                   double eps_tilde) {
  PrivacyReport report;
  report.prior_budget = 0.0;
  report.resampling_budget = eps_tilde;
  report.epsilon = eps_tilde;
  report.delta = std::max(
      0.0, 1 - lambda - lambda / num_outcomes * std::expm1(eps_tilde));
  return report;
}

absl::StatusOr<double> CalibrateLambda(double target_eps, double target_delta,
                                       double gamma, ExtendedReal sigma) {
  if (absl::Status s = CheckTargets(target_eps, target_delta); !s.ok()) {
    return s;
  }
  const ExtendedReal prior = PriorBudget(gamma, sigma);
  if (!(prior < ExtendedReal(target_eps))) {
    return absl::FailedPreconditionError(absl::StrCat(
        "budget exhausted by prior estimation: prior budget ",
        prior.ToString(), " >= target epsilon ", FormatDouble(target_eps)));
  }
  const double eps_tilde = target_eps - prior.value();
  return (1 - target_delta) / (1 + gamma * std::expm1(eps_tilde));
}

absl::StatusOr<double> CalibrateUniformLambda(double target_eps,
                                              double target_delta,
                                              int num_outcomes) {
  if (absl::Status s = CheckTargets(target_eps, target_delta); !s.ok()) {
    return s;
  }
  return (1 - target_delta) / (1 + std::expm1(target_eps) / num_outcomes);
}

absl::StatusOr<MechanismParams> Calibrate(MechanismParams params,
                                          double target_eps,
                                          double target_delta,
                                          int num_outcomes) {
  absl::StatusOr<double> lambda;
  switch (params.kind) {
    case MechanismKind::kClusterDp:
    case MechanismKind::kClusterFreeDp:
      lambda = CalibrateLambda(target_eps, target_delta, params.gamma,
                               params.sigma);
      break;
    case MechanismKind::kUniformPriorDp:
      lambda = CalibrateUniformLambda(target_eps, target_delta, num_outcomes);
      break;
    default:
      if (absl::Status s = CheckTargets(target_eps, 0); !s.ok()) return s;
      params.epsilon = target_eps;
      return params;
  }
  if (!lambda.ok()) return lambda.status();
  params.lambda = *lambda;
  return params;
}

absl::StatusOr<PrivacyReport> Account(const MechanismParams& params,
                                      int num_outcomes,
                                      std::optional<double> eps_tilde) {
  if (absl::Status s = ValidateParams(params, num_outcomes); !s.ok()) return s;
  if (eps_tilde.has_value()) {
    if (absl::Status s = CheckEpsTilde(*eps_tilde); !s.ok()) return s;
  }
  switch (params.kind) {
    case MechanismKind::kClusterDp:
    case MechanismKind::kClusterFreeDp: {
      if (eps_tilde.has_value()) return ClusterDpEpsDelta(params, *eps_tilde);
      PrivacyReport report;
      report.prior_budget = PriorBudget(params.gamma, params.sigma);
      report.resampling_budget =
          PureResamplingBudget(params.lambda, params.gamma);
      report.epsilon = report.prior_budget + report.resampling_budget;
      return report;
    }
    case MechanismKind::kUniformPriorDp: {
      if (eps_tilde.has_value()) {
        return UniformPriorEpsDelta(num_outcomes, params.lambda, *eps_tilde);
      }
      PrivacyReport report;
      report.prior_budget = 0.0;
      report.epsilon = UniformPriorEps(num_outcomes, params.lambda);
      report.resampling_budget = report.epsilon;
      return report;
    }
    default: {
      PrivacyReport report;
      report.epsilon = params.epsilon;
      report.prior_budget = 0.0;
      report.resampling_budget = 0.0;
      return report;
    }
  }
}

}  // namespace clusterdp
