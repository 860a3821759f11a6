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

#include "clusterdp/simdata.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace clusterdp {
namespace {

// Linear interpolation between order statistics of sorted data.
double Percentile(std::span<const double> sorted, double p) {
  const double pos = p / 100 * (sorted.size() - 1);
  const size_t lo = static_cast<size_t>(std::floor(pos));
  const size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - lo) * (sorted[hi] - sorted[lo]);
}

}  // namespace

int Quantize(double y_prime, double v, int k_prime) {
  const double edge = 2 * std::sqrt(v);
  if (y_prime > edge) return k_prime;
  if (y_prime < -edge) return -k_prime;
  const double step = edge / k_prime;
  // std::round rounds halfway cases away from zero.
  return static_cast<int>(std::round(y_prime / step));
}

absl::Status ValidateGmmConfig(const GmmConfig& config) {
  if (!(config.v > 0)) return absl::InvalidArgumentError("v must be positive");
  if (!(config.beta >= 0 && config.beta <= config.v)) {
    return absl::InvalidArgumentError("beta must lie in [0, v]");
  }
  if (config.k_prime < 1) {
    return absl::InvalidArgumentError("k_prime must be at least 1");
  }
  if (config.tau != 0 && config.tau != 1) {
    return absl::InvalidArgumentError(
        "tau must be 0 or 1 to keep y(1) inside {-K', ..., K'+1}");
  }
  if (config.cluster_sizes.empty()) {
    return absl::InvalidArgumentError("no clusters requested");
  }
  for (int size : config.cluster_sizes) {
    if (size < kMinClusterSize) {
      return absl::InvalidArgumentError(
          absl::StrCat("cluster size ", size, " below minimum size 2"));
    }
  }
  return absl::OkStatus();
}

absl::StatusOr<Population> GenGmm(const GmmConfig& config, RngStream& rng) {
  if (absl::Status s = ValidateGmmConfig(config); !s.ok()) return s;
  const OutcomeSpace space =
      OutcomeSpace::IntegerRange(-config.k_prime, config.k_prime + 1);
  const double center_scale = std::sqrt(config.beta);
  const double unit_scale = std::sqrt(config.v - config.beta);
  std::vector<int> cluster, y0, y1;
  for (int c = 0; c < static_cast<int>(config.cluster_sizes.size()); ++c) {
    const double mu = rng.StandardNormal();
    for (int i = 0; i < config.cluster_sizes[c]; ++i) {
      const double y_prime = center_scale * mu + unit_scale * rng.StandardNormal();
      const int value = Quantize(y_prime, config.v, config.k_prime);
      cluster.push_back(c);
      // Index of value in {-K', ..., K'+1}.
      y0.push_back(value + config.k_prime);
      y1.push_back(value + config.k_prime + config.tau);
    }
  }
  return Population::Create(space, std::move(cluster), std::move(y0),
                            std::move(y1));
}

absl::Status ValidateGraphConfig(const GraphPopConfig& config) {
  if (config.community_sizes.size() < 2) {
    return absl::InvalidArgumentError("need at least two communities");
  }
  for (int size : config.community_sizes) {
    if (size < kMinClusterSize) {
      return absl::InvalidArgumentError(
          absl::StrCat("community size ", size, " below minimum size 2"));
    }
  }
  for (double p : {config.p_in, config.p_out}) {
    if (!(p >= 0 && p <= 1)) {
      return absl::InvalidArgumentError("edge probabilities must lie in [0, 1]");
    }
  }
  if (!(config.v >= 0)) {
    return absl::InvalidArgumentError("noise sd must be non-negative");
  }
  if (config.levels < 2) {
    return absl::InvalidArgumentError("need at least two levels");
  }
  return absl::OkStatus();
}

absl::StatusOr<std::vector<std::array<double, 4>>> StandardizeFeatures(
    std::span<const std::array<double, 4>> raw) {
  std::vector<std::array<double, 4>> out(raw.begin(), raw.end());
  for (int f = 0; f < 4; ++f) {
    double mean = 0;
    for (const auto& row : raw) mean += row[f];
    mean /= raw.size();
    double norm = 0;
    double scale = 0;
    for (const auto& row : raw) {
      norm += (row[f] - mean) * (row[f] - mean);
      scale = std::max(scale, std::abs(row[f]));
    }
    norm = std::sqrt(norm);
    if (norm <= 1e-12 * std::max(scale, 1.0)) {
      return absl::InvalidArgumentError(absl::StrCat(
          "feature standardization undefined: feature ", f,
          " is constant across communities"));
    }
    for (auto& row : out) row[f] = (row[f] - mean) / norm;
  }
  return out;
}

absl::StatusOr<GraphPopulation> GenGraphPopulation(
    const GraphPopConfig& config, RngStream& rng) {
  if (absl::Status s = ValidateGraphConfig(config); !s.ok()) return s;
  const int num_communities = static_cast<int>(config.community_sizes.size());
  std::vector<int> community;
  for (int c = 0; c < num_communities; ++c) {
    community.insert(community.end(), config.community_sizes[c], c);
  }
  const int n = static_cast<int>(community.size());

  std::vector<std::array<double, 4>> raw(num_communities, {0, 0, 0, 0});
  for (int c = 0; c < num_communities; ++c) raw[c][0] = config.community_sizes[c];
  int num_edges = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const bool same = community[i] == community[j];
      if (!rng.Bernoulli(same ? config.p_in : config.p_out)) continue;
      ++num_edges;
      if (same) {
        raw[community[i]][1] += 1;
      } else {
        raw[community[i]][2] += 1;
        raw[community[j]][2] += 1;
      }
    }
  }
  for (auto& row : raw) row[3] = row[1] / (row[0] * (row[0] - 1) / 2);

  absl::StatusOr<std::vector<std::array<double, 4>>> standardized =
      StandardizeFeatures(raw);
  if (!standardized.ok()) return standardized.status();

  std::vector<double> continuous0(n), pooled;
  pooled.reserve(2 * n);
  for (int i = 0; i < n; ++i) {
    const auto& x = (*standardized)[community[i]];
    double mean = 0;
    for (int f = 0; f < 4; ++f) mean += x[f] * config.beta[f];
    continuous0[i] = mean + config.v * rng.StandardNormal();
    pooled.push_back(continuous0[i]);
    pooled.push_back(continuous0[i] + config.tau);
  }
  std::ranges::sort(pooled);
  const double lo = Percentile(pooled, 0.5);
  const double hi = Percentile(pooled, 99.5);
  if (!(hi > lo)) {
    return absl::InvalidArgumentError("outcome range collapsed; cannot bin");
  }
  const double width = (hi - lo) / config.levels;
  auto bin = [&](double y) {
    const int b = static_cast<int>(std::floor((y - lo) / width));
    return std::clamp(b, 0, config.levels - 1);
  };
  std::vector<int> y0(n), y1(n);
  double effect = 0;
  for (int i = 0; i < n; ++i) {
    y0[i] = bin(continuous0[i]);
    y1[i] = bin(continuous0[i] + config.tau);
    effect += y1[i] - y0[i];
  }
  absl::StatusOr<Population> pop = Population::Create(
      OutcomeSpace::IntegerRange(0, config.levels - 1), community,
      std::move(y0), std::move(y1));
  if (!pop.ok()) return pop.status();
  GraphPopulation out{*std::move(pop), {raw, *std::move(standardized)},
                      num_edges, effect / n};
  return out;
}

absl::StatusOr<std::vector<int>> SubsampleIndices(const Population& pop,
                                                  std::span<const int> counts,
                                                  RngStream& rng) {
  if (static_cast<int>(counts.size()) != pop.num_clusters()) {
    return absl::InvalidArgumentError("one count needed per cluster");
  }
  std::vector<int> chosen;
  std::vector<int> scratch;
  for (int c = 0; c < pop.num_clusters(); ++c) {
    std::span<const int> members = pop.members(c);
    if (counts[c] < 0 || counts[c] > static_cast<int>(members.size())) {
      return absl::InvalidArgumentError(
          absl::StrCat("cluster ", c, ": requested ", counts[c],
                       " units, cluster has ", members.size()));
    }
    scratch.assign(members.begin(), members.end());
    for (int k = 0; k < counts[c]; ++k) {
      const int j = k + static_cast<int>(rng.UniformIndex(scratch.size() - k));
      std::swap(scratch[k], scratch[j]);
      chosen.push_back(scratch[k]);
    }
  }
  std::ranges::sort(chosen);
  return chosen;
}

absl::StatusOr<Population> Subsample(const Population& pop,
                                     std::span<const int> counts,
                                     RngStream& rng) {
  absl::StatusOr<std::vector<int>> indices = SubsampleIndices(pop, counts, rng);
  if (!indices.ok()) return indices.status();
  return pop.Subset(*indices);
}

}  // namespace clusterdp
