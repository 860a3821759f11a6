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

#ifndef CLUSTERDP_MECHANISMS_H_
#define CLUSTERDP_MECHANISMS_H_

#include <span>
#include <vector>

#include "absl/status/statusor.h"
#include "clusterdp/extended_real.h"
#include "clusterdp/params.h"
#include "clusterdp/population.h"
#include "clusterdp/release.h"
#include "clusterdp/rng.h"

namespace clusterdp {

// Outcome counts of one (cluster, arm) and their empirical frequencies.
struct ArmHistogram {
  std::vector<int> counts;
  std::vector<double> p_hat;
  int n = 0;
};

absl::StatusOr<ArmHistogram> EmpiricalHistogram(const ObservedData& obs,
                                                int c, int arm);

// Adds (sigma / n_ac) * noise[y] to p_hat[y] and clips to [gamma, 1].
// `noise` holds standard Laplace draws. An infinite sigma takes the limit of
// unbounded noise: the entry goes to 1 or gamma by the sign of the draw.
std::vector<double> PerturbClip(std::span<const double> p_hat, double gamma,
                                ExtendedReal sigma, int n_ac,
                                std::span<const double> noise);

// Projects a clipped vector (entries in [gamma, 1]) onto the simplex while
// keeping every entry >= gamma.
std::vector<double> Renormalize(std::span<const double> q, double gamma);

// All randomness consumed by the prior-based mechanisms. `laplace` holds one
// standard Laplace draw per (prior group, arm, outcome), where the prior
// groups are the clusters (Cluster-DP) or a single pooled group
// (Cluster-Free-DP). `resample` and `draw` hold two uniforms per unit.
struct MechanismNoise {
  std::vector<double> laplace;
  std::vector<double> resample;
  std::vector<double> draw;
};

// Draws noise for `num_units` units from the laplace and resampling streams.
MechanismNoise DrawMechanismNoise(const StreamFactory& streams,
                                  int num_prior_groups, int num_outcomes,
                                  int num_units);

// The projected prior of every (cluster, arm) given injected noise.
absl::StatusOr<ProjectedPrior> ComputePrior(const ObservedData& obs,
                                            const MechanismParams& params,
                                            std::span<const double> laplace);

// Resampling step: unit i keeps y_i when resample[i] >= lambda, otherwise
// reports the inverse-CDF draw of draw[i] under its (cluster, arm) prior.
absl::StatusOr<PrivatizedRelease> Resample(const ObservedData& obs,
                                           const MechanismParams& params,
                                           ProjectedPrior prior,
                                           std::span<const double> resample,
                                           std::span<const double> draw);

// Cluster-DP and Cluster-Free-DP (by params.kind) with injected noise.
absl::StatusOr<PrivatizedRelease> ClusterDpWithNoise(
    const ObservedData& obs, const MechanismParams& params,
    const MechanismNoise& noise);

// Cluster-DP, Cluster-Free-DP or Uniform-Prior-DP, by params.kind.
absl::StatusOr<PrivatizedRelease> Privatize(const ObservedData& obs,
                                            const MechanismParams& params,
                                            const StreamFactory& streams);

absl::StatusOr<PrivatizedRelease> ClusterDp(const ObservedData& obs,
                                            const MechanismParams& params,
                                            const StreamFactory& streams);

absl::StatusOr<PrivatizedRelease> UniformPriorDp(const ObservedData& obs,
                                                 double lambda,
                                                 const StreamFactory& streams);

// A privately released scalar estimate.
struct NoisyEstimate {
  double estimate = 0;
  std::vector<double> noise_scales;
};

// Stratified difference in means plus Laplace(Delta_c / epsilon) per
// cluster, Delta_c = max|y| / min(n_0c, n_1c). `noise` holds one standard
// Laplace draw per cluster.
absl::StatusOr<NoisyEstimate> NoisyHtWithNoise(const ObservedData& obs,
                                               ExtendedReal epsilon,
                                               std::span<const double> noise);

// Laplace(1 / (n_ac epsilon)) added to every empirical frequency before the
// weighted difference. `noise` holds one standard Laplace draw per
// (cluster, arm, outcome).
absl::StatusOr<NoisyEstimate> NoisyHistogramWithNoise(
    const ObservedData& obs, ExtendedReal epsilon,
    std::span<const double> noise);

absl::StatusOr<NoisyEstimate> NoisyHt(const ObservedData& obs,
                                      ExtendedReal epsilon,
                                      const StreamFactory& streams);
absl::StatusOr<NoisyEstimate> NoisyHistogram(const ObservedData& obs,
                                             ExtendedReal epsilon,
                                             const StreamFactory& streams);

// Standard Laplace draws from the laplace stream.
std::vector<double> DrawLaplace(const StreamFactory& streams, int count);

}  // namespace clusterdp

#endif  // CLUSTERDP_MECHANISMS_H_
