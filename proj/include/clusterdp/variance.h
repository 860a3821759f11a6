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

#ifndef CLUSTERDP_VARIANCE_H_
#define CLUSTERDP_VARIANCE_H_

#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "absl/status/statusor.h"
#include "clusterdp/outcome_space.h"
#include "clusterdp/params.h"
#include "clusterdp/population.h"

namespace clusterdp {

// Unbiased sample variance; needs at least two entries.
absl::StatusOr<double> SampleVariance(std::span<const double> u);

// Exact randomization variance of the stratified difference in means:
// sum_c (n_c/n)^2 (S^2(y_c(1))/n_1c + S^2(y_c(0))/n_0c - S^2(tau_c)/n_c).
absl::StatusOr<double> HtVariance(const Population& pop,
                                  const ArmCounts& counts);

// Cluster homogeneity of arm a: sum_c (n_c/n)^2 S^2(y_c(a)) / n_ac.
absl::StatusOr<double> Homogeneity(const Population& pop,
                                   const ArmCounts& counts, int arm);

enum class AOfXVariant {
  kProduct,  // B^2 (3/(1-l)^2 + 2) + (l sqrt(K)+1)^2/(1-l)^2 |y|^2 (...)
  kSum,      // 2 B^2 + (3 B^2 + (l sqrt(K)+1)^2 + |y|^2 (...)) / (1-l)^2
};

// The cluster-agnostic term A(x) of the variance-gap bound for an arm of
// x units. Infinite and zero sigma use the analytic limits of the noise
// bracket (1 and gamma respectively).
absl::StatusOr<double> AOfX(double x, const OutcomeSpace& space,
                            const MechanismParams& params,
                            AOfXVariant variant = AOfXVariant::kProduct);

enum class VarianceKind { kExact, kUpperBound, kMonteCarlo };

std::string_view VarianceKindName(VarianceKind kind);

// A variance (or an upper bound on it) with a named breakdown.
struct VarianceReport {
  VarianceKind kind = VarianceKind::kExact;
  double no_dp_variance = 0;
  double value = 0;
  std::vector<std::pair<std::string, double>> components;

  // Value of the named component; NaN when absent.
  double component(std::string_view name) const;
};

// Bound on the variance of the debiased estimator under Cluster-DP:
// Var_NoDP + (1/(1-l)^2 - 1)(phi_0 + phi_1) + sum_a sum_c (n_c/n)^2
// A(n_ac)/n_ac. Components: phi0, phi1, homogeneity_term (the lower
// component), a_term, gap_bound.
absl::StatusOr<VarianceReport> ClusterDpVarianceBound(
    const Population& pop, const ArmCounts& counts,
    const MechanismParams& params,
    AOfXVariant variant = AOfXVariant::kProduct);

// Exact variance of the (1-l)^{-1}-scaled estimator under the uniform-prior
// mechanism. With stratified = false, all units are treated as one cluster
// under complete randomization of counts.total_treated() units.
absl::StatusOr<VarianceReport> UniformPriorVarianceReport(
    const Population& pop, const ArmCounts& counts, double lambda,
    bool stratified);

absl::StatusOr<double> UniformPriorVariance(const Population& pop,
                                            const ArmCounts& counts,
                                            double lambda, bool stratified);

// Var_NoDP + (n / (n_0 n_1)) (l/2)(1 - l/2) / (1 - l)^2, the binary-outcome
// pooled case.
double UniformPriorVarianceBinary(double no_dp_variance, int n0, int n1,
                                  double lambda);

// Pools the per-cluster counts into one cluster.
ArmCounts PooledCounts(const ArmCounts& counts);

struct BaselineGapValues {
  double noisy_ht = 0;
  double noisy_histogram = 0;
};

// Added variance of the two noisy-estimator baselines:
// 2 sum_c (n_c/n Delta_c/eps)^2 and (2/eps^2) |y|^2 sum_c (n_c/n)^2
// (1/n_0c^2 + 1/n_1c^2).
absl::StatusOr<BaselineGapValues> BaselineGaps(const ArmCounts& counts,
                                               const OutcomeSpace& space,
                                               double epsilon);

}  // namespace clusterdp

#endif  // CLUSTERDP_VARIANCE_H_
