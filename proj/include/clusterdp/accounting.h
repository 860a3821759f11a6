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

#ifndef CLUSTERDP_ACCOUNTING_H_
#define CLUSTERDP_ACCOUNTING_H_

#include <optional>

#include "absl/status/statusor.h"
#include "clusterdp/extended_real.h"
#include "clusterdp/params.h"

namespace clusterdp {

// An (epsilon, delta) guarantee split into the prior-estimation budget and
// the resampling budget; epsilon = prior_budget + resampling_budget.
struct PrivacyReport {
  ExtendedReal epsilon;
  double delta = 0;
  ExtendedReal prior_budget;
  ExtendedReal resampling_budget;
};

// min(1/sigma, 2/gamma), with 1/0 = inf.
ExtendedReal PriorBudget(double gamma, ExtendedReal sigma);

// Guarantee of Cluster-DP / Cluster-Free-DP for a chosen resampling budget
// eps_tilde > 0: delta = max(0, 1 - lambda + lambda gamma (1 - e^eps_tilde)).
PrivacyReport ClusterDpEpsDelta(const MechanismParams& params,
                                double eps_tilde);

// The pure guarantee, reached at eps_tilde = log(1 + (1-lambda)/(lambda
// gamma)). Infinite when lambda = 0 or gamma = 0 with lambda < 1.
ExtendedReal ClusterDpPureEps(const MechanismParams& params);

// log(1 + (1 - lambda) K / lambda); infinite for lambda = 0.
ExtendedReal UniformPriorEps(int num_outcomes, double lambda);

// delta = max(0, 1 - lambda + (lambda / K)(1 - e^eps_tilde)).
PrivacyReport UniformPriorEpsDelta(int num_outcomes, double lambda,
                                   double eps_tilde);

// Largest-variance-reducing lambda meeting (target_eps, target_delta):
// eps_tilde = target_eps - PriorBudget, lambda = (1 - delta) / (1 + gamma
// (e^eps_tilde - 1)). Fails with "budget exhausted by prior estimation"
// when target_eps does not exceed the prior budget.
absl::StatusOr<double> CalibrateLambda(double target_eps, double target_delta,
                                       double gamma, ExtendedReal sigma);

// lambda = (1 - delta) / (1 + (e^eps - 1) / K), which is K / (e^eps - 1 + K)
// for delta = 0.
absl::StatusOr<double> CalibrateUniformLambda(double target_eps,
                                              double target_delta,
                                              int num_outcomes);

// Calibrates params.lambda for any prior-based kind, leaving other fields.
absl::StatusOr<MechanismParams> Calibrate(MechanismParams params,
                                          double target_eps,
                                          double target_delta,
                                          int num_outcomes);

// Guarantee of any mechanism. For the prior-based kinds `eps_tilde` selects
// the resampling budget; when absent the pure-epsilon report (delta = 0) is
// returned. The noisy baselines report (params.epsilon, 0).
absl::StatusOr<PrivacyReport> Account(const MechanismParams& params,
                                      int num_outcomes,
                                      std::optional<double> eps_tilde = {});

}  // namespace clusterdp

#endif  // CLUSTERDP_ACCOUNTING_H_
