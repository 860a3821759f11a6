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

#ifndef CLUSTERDP_ESTIMATION_H_
#define CLUSTERDP_ESTIMATION_H_

#include <span>
#include <vector>

#include "Eigen/Core"
#include "absl/status/statusor.h"
#include "clusterdp/outcome_space.h"
#include "clusterdp/population.h"
#include "clusterdp/release.h"

namespace clusterdp {

// Q[y', y] = (1 - lambda) 1{y' = y} + lambda prior[y']: the probability of
// reporting y' when the true outcome is y. Fails for lambda = 1.
absl::StatusOr<Eigen::MatrixXd> BuildQ(std::span<const double> prior,
                                       double lambda);

// Closed-form inverse I / (1 - lambda) - lambda / (1 - lambda) prior 1^T.
absl::StatusOr<Eigen::MatrixXd> InvertQ(std::span<const double> prior,
                                        double lambda);

// Row vector y^T Q^{-1}: entry j is (y_j - lambda <y, prior>) / (1 - lambda).
absl::StatusOr<std::vector<double>> DebiasRow(const OutcomeSpace& space,
                                              std::span<const double> prior,
                                              double lambda);

// A single entry of DebiasRow.
absl::StatusOr<double> DebiasValue(const OutcomeSpace& space,
                                   std::span<const double> prior,
                                   double lambda, int y_tilde);

// Debias rows for every (cluster, arm) of `prior`.
absl::StatusOr<ArmTable> DebiasTable(const OutcomeSpace& space,
                                     const ProjectedPrior& prior,
                                     double lambda);

// Stratified contrast sum_c (n_c / n) [mean over treated of values - mean
// over control of values], accumulated in cluster order. Returns the total
// and fills `per_cluster` (weighted contributions) when non-null.
double StratifiedDifference(std::span<const int> cluster,
                            std::span<const uint8_t> z,
                            std::span<const double> values,
                            const ArmCounts& counts,
                            std::vector<double>* per_cluster = nullptr);

struct TauEstimate {
  double estimate = 0;
  std::vector<double> cluster_contributions;
};

// The debiased estimator over a release. Only released data is consulted.
absl::StatusOr<TauEstimate> TauQ(const PrivatizedRelease& release);

// Stratified and pooled difference in means over true observed outcomes.
double TauNoDp(const ObservedData& obs);
double TauNoDpUnstratified(const ObservedData& obs);
double TauNoDp(const Population& pop, const Design& design);
double TauNoDpUnstratified(const Population& pop, const Design& design);

// (1 - lambda)^{-1}-scaled difference of privatized outcomes, for releases of
// the uniform-prior mechanism.
absl::StatusOr<double> TauUniform(const PrivatizedRelease& release,
                                  bool stratified);

}  // namespace clusterdp

#endif  // CLUSTERDP_ESTIMATION_H_
