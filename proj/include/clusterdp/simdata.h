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

#ifndef CLUSTERDP_SIMDATA_H_
#define CLUSTERDP_SIMDATA_H_

#include <array>
#include <span>
#include <vector>

#include "absl/status/statusor.h"
#include "clusterdp/population.h"
#include "clusterdp/rng.h"

namespace clusterdp {

// K' if y' > 2 sqrt(v), -K' if y' < -2 sqrt(v), else y' / Delta rounded half
// away from zero, with Delta = 2 sqrt(v) / K'.
int Quantize(double y_prime, double v, int k_prime);

struct GmmConfig {
  double beta = 4.5;
  double v = 5;
  int k_prime = 5;
  int tau = 1;
  std::vector<int> cluster_sizes = {500, 1000, 2000};
};

absl::Status ValidateGmmConfig(const GmmConfig& config);

// Gaussian-mixture population: y' = sqrt(beta) mu_c + sqrt(v - beta) w_i with
// standard normal mu_c and w_i, y(0) = Quantize(y'), y(1) = y(0) + tau, over
// the outcome space {-K', ..., K' + 1}.
absl::StatusOr<Population> GenGmm(const GmmConfig& config, RngStream& rng);

struct GraphPopConfig {
  std::vector<int> community_sizes = {20, 30, 40, 50, 60, 70, 80, 90};
  double p_in = 0.3;
  double p_out = 0.01;
  std::array<double, 4> beta = {1, 1, 1, 1};
  double v = 0.1;  // noise standard deviation
  int levels = 8;
  double tau = 1;
};

absl::Status ValidateGraphConfig(const GraphPopConfig& config);

// Per-community statistics of a graph: node count, internal edges, edges
// leaving the community, and internal density e / (n choose 2).
struct CommunityFeatures {
  std::vector<std::array<double, 4>> raw;
  std::vector<std::array<double, 4>> standardized;
};

// Centers each feature column over communities and scales it to unit l2
// norm. Fails with "feature standardization undefined" for a constant
// column.
absl::StatusOr<std::vector<std::array<double, 4>>> StandardizeFeatures(
    std::span<const std::array<double, 4>> raw);

struct GraphPopulation {
  Population population;
  CommunityFeatures features;
  int num_edges = 0;
  // Average effect after binning; differs from config.tau in general.
  double realized_tau = 0;
};

// Planted-partition graph whose communities are the clusters. Unit outcomes
// are x_c^T beta + w_i on the standardized features, w_i ~ N(0, v^2); y(1)
// adds tau on the continuous scale and both arms are binned jointly into
// `levels` equal-width bins between the pooled 0.5th and 99.5th percentiles,
// labelled 0..levels-1.
absl::StatusOr<GraphPopulation> GenGraphPopulation(
    const GraphPopConfig& config, RngStream& rng);

// Unit indices (ascending) of a uniform without-replacement subsample of
// counts[c] units from every cluster c.
absl::StatusOr<std::vector<int>> SubsampleIndices(const Population& pop,
                                                  std::span<const int> counts,
                                                  RngStream& rng);

absl::StatusOr<Population> Subsample(const Population& pop,
                                     std::span<const int> counts,
                                     RngStream& rng);

}  // namespace clusterdp

#endif  // CLUSTERDP_SIMDATA_H_
