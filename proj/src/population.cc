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

#include "clusterdp/population.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>
#include <unordered_set>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "clusterdp/extended_real.h"

namespace clusterdp {
namespace {

std::string Where(const PopulationRecord& r, size_t row) {
  if (r.line > 0) return absl::StrCat("line ", r.line);
  return absl::StrCat("record ", row);
}

std::vector<std::vector<int>> GroupMembers(std::span<const int> cluster,
                                           int num_clusters) {
  std::vector<std::vector<int>> members(num_clusters);
  for (int i = 0; i < static_cast<int>(cluster.size()); ++i) {
    members[cluster[i]].push_back(i);
  }
  return members;
}

ArmCounts CountArms(std::span<const int> cluster, std::span<const uint8_t> z,
                    int num_clusters) {
  ArmCounts counts;
  counts.treated.assign(num_clusters, 0);
  counts.control.assign(num_clusters, 0);
  for (size_t i = 0; i < cluster.size(); ++i) {
    if (z[i]) {
      ++counts.treated[cluster[i]];
    } else {
      ++counts.control[cluster[i]];
    }
  }
  return counts;
}

}  // namespace

std::vector<std::string> ValidatePopulation(
    std::span<const PopulationRecord> records, const OutcomeSpace& space) {
  std::vector<std::string> violations;
  std::unordered_set<std::string> seen_ids;
  std::vector<std::string> order;
  std::unordered_map<std::string, int> sizes;
  for (size_t row = 0; row < records.size(); ++row) {
    const PopulationRecord& r = records[row];
    if (!seen_ids.insert(r.unit_id).second) {
      violations.push_back(
          absl::StrCat(Where(r, row), ": duplicate unit '", r.unit_id, "'"));
    }
    for (double y : {r.y0, r.y1}) {
      if (!space.IndexOf(y).has_value()) {
        violations.push_back(absl::StrCat(Where(r, row),
                                          ": outcome outside space (",
                                          FormatDouble(y), ")"));
      }
    }
    if (sizes[r.cluster]++ == 0) order.push_back(r.cluster);
  }
  for (const std::string& label : order) {
    if (sizes[label] < kMinClusterSize) {
      violations.push_back(absl::StrCat("cluster below minimum size 2: '",
                                        label, "' has ", sizes[label],
                                        " unit(s)"));
    }
  }
  return violations;
}

absl::StatusOr<Population> Population::FromRecords(
    std::span<const PopulationRecord> records, OutcomeSpace space) {
  std::vector<std::string> violations = ValidatePopulation(records, space);
  if (!violations.empty()) {
    return absl::InvalidArgumentError(absl::StrJoin(violations, "; "));
  }
  std::unordered_map<std::string, int> dense;
  std::vector<std::string> labels;
  std::vector<int> cluster, y0, y1;
  std::vector<std::string> ids;
  for (const PopulationRecord& r : records) {
    auto [it, inserted] =
        dense.emplace(r.cluster, static_cast<int>(labels.size()));
    if (inserted) labels.push_back(r.cluster);
    cluster.push_back(it->second);
    y0.push_back(*space.IndexOf(r.y0));
    y1.push_back(*space.IndexOf(r.y1));
    ids.push_back(r.unit_id);
  }
  return Create(std::move(space), std::move(cluster), std::move(y0),
                std::move(y1), std::move(ids), std::move(labels));
}

absl::StatusOr<Population> Population::Create(
    OutcomeSpace space, std::vector<int> cluster, std::vector<int> y0,
    std::vector<int> y1, std::vector<std::string> unit_ids,
    std::vector<std::string> cluster_labels) {
  const size_t n = cluster.size();
  if (y0.size() != n || y1.size() != n ||
      (!unit_ids.empty() && unit_ids.size() != n)) {
    return absl::InvalidArgumentError("population column lengths differ");
  }
  int num_clusters = 0;
  for (size_t i = 0; i < n; ++i) {
    if (cluster[i] < 0) {
      return absl::InvalidArgumentError("cluster ids must be non-negative");
    }
    if (y0[i] < 0 || y0[i] >= space.size() || y1[i] < 0 ||
        y1[i] >= space.size()) {
      return absl::InvalidArgumentError(
          absl::StrCat("unit ", i, ": outcome outside space"));
    }
    num_clusters = std::max(num_clusters, cluster[i] + 1);
  }
  if (!cluster_labels.empty() &&
      static_cast<int>(cluster_labels.size()) != num_clusters) {
    return absl::InvalidArgumentError("cluster label count mismatch");
  }
  Population pop;
  pop.members_ = GroupMembers(cluster, num_clusters);
  for (int c = 0; c < num_clusters; ++c) {
    if (static_cast<int>(pop.members_[c].size()) < kMinClusterSize) {
      return absl::InvalidArgumentError(
          absl::StrCat("cluster below minimum size 2: cluster ", c, " has ",
                       pop.members_[c].size(), " unit(s)"));
    }
  }
  if (unit_ids.empty()) {
    unit_ids.reserve(n);
    for (size_t i = 0; i < n; ++i) unit_ids.push_back(absl::StrCat("u", i));
  }
  if (cluster_labels.empty()) {
    for (int c = 0; c < num_clusters; ++c) {
      cluster_labels.push_back(absl::StrCat(c));
    }
  }
  pop.space_ = std::move(space);
  pop.cluster_ = std::move(cluster);
  pop.y0_ = std::move(y0);
  pop.y1_ = std::move(y1);
  pop.unit_ids_ =
      std::make_shared<const std::vector<std::string>>(std::move(unit_ids));
  pop.cluster_labels_ = std::make_shared<const std::vector<std::string>>(
      std::move(cluster_labels));
  return pop;
}

double Population::Ate() const {
  double sum = 0;
  for (int i = 0; i < size(); ++i) sum += y1(i) - y0(i);
  return sum / size();
}

Population Population::Pooled() const {
  Population pooled = *this;
  pooled.cluster_.assign(size(), 0);
  pooled.members_.assign(1, std::vector<int>(size()));
  std::iota(pooled.members_[0].begin(), pooled.members_[0].end(), 0);
  pooled.cluster_labels_ =
      std::make_shared<const std::vector<std::string>>(1, "pooled");
  return pooled;
}

absl::StatusOr<Population> Population::Subset(
    std::span<const int> indices) const {
  std::vector<int> cluster, y0, y1;
  std::vector<std::string> ids;
  for (int i : indices) {
    if (i < 0 || i >= size()) {
      return absl::OutOfRangeError(absl::StrCat("unit index ", i));
    }
    cluster.push_back(cluster_[i]);
    y0.push_back(y0_[i]);
    y1.push_back(y1_[i]);
    ids.push_back(unit_id(i));
  }
  return Create(space_, std::move(cluster), std::move(y0), std::move(y1),
                std::move(ids), *cluster_labels_);
}

int ArmCounts::total() const {
  return std::accumulate(treated.begin(), treated.end(), 0) +
         std::accumulate(control.begin(), control.end(), 0);
}

int ArmCounts::total_treated() const {
  return std::accumulate(treated.begin(), treated.end(), 0);
}

ArmCounts BalancedCounts(const Population& pop) {
  ArmCounts counts;
  for (int c = 0; c < pop.num_clusters(); ++c) {
    const int n = pop.cluster_size(c);
    counts.treated.push_back(n / 2);
    counts.control.push_back(n - n / 2);
  }
  return counts;
}

absl::StatusOr<ArmCounts> CountsFromFractions(
    const Population& pop, std::span<const double> fractions) {
  if (static_cast<int>(fractions.size()) != pop.num_clusters()) {
    return absl::InvalidArgumentError(
        absl::StrCat("expected ", pop.num_clusters(),
                     " treated fractions, got ", fractions.size()));
  }
  ArmCounts counts;
  for (int c = 0; c < pop.num_clusters(); ++c) {
    const int n = pop.cluster_size(c);
    const int treated = static_cast<int>(std::lround(fractions[c] * n));
    counts.treated.push_back(treated);
    counts.control.push_back(n - treated);
  }
  if (absl::Status s = CheckCounts(pop, counts); !s.ok()) return s;
  return counts;
}

absl::Status CheckCounts(const Population& pop, const ArmCounts& counts) {
  if (counts.num_clusters() != pop.num_clusters() ||
      counts.control.size() != counts.treated.size()) {
    return absl::InvalidArgumentError("arm counts do not match clusters");
  }
  for (int c = 0; c < pop.num_clusters(); ++c) {
    if (counts.treated[c] < 1 || counts.control[c] < 1) {
      return absl::InvalidArgumentError(absl::StrCat(
          "cluster ", c, ": treated count must lie in [1, n_c - 1], got ",
          counts.treated[c], " of ", pop.cluster_size(c)));
    }
    if (counts.cluster_size(c) != pop.cluster_size(c)) {
      return absl::InvalidArgumentError(
          absl::StrCat("cluster ", c, ": arm counts sum to ",
                       counts.cluster_size(c), ", cluster has ",
                       pop.cluster_size(c)));
    }
  }
  return absl::OkStatus();
}

absl::StatusOr<Design> DrawDesign(const Population& pop,
                                  const ArmCounts& counts, RngStream& rng) {
  if (absl::Status s = CheckCounts(pop, counts); !s.ok()) return s;
  Design design{counts, std::vector<uint8_t>(pop.size(), 0)};
  std::vector<int> scratch;
  for (int c = 0; c < pop.num_clusters(); ++c) {
    std::span<const int> members = pop.members(c);
    scratch.assign(members.begin(), members.end());
    const int n = static_cast<int>(scratch.size());
    // Partial Fisher-Yates: the first n1c slots are a uniform subset.
    for (int k = 0; k < counts.treated[c]; ++k) {
      const int j = k + static_cast<int>(rng.UniformIndex(n - k));
      std::swap(scratch[k], scratch[j]);
      design.z[scratch[k]] = 1;
    }
  }
  return design;
}

absl::StatusOr<Design> DesignFromAssignment(const Population& pop,
                                            std::vector<uint8_t> z) {
  if (static_cast<int>(z.size()) != pop.size()) {
    return absl::InvalidArgumentError("assignment length mismatch");
  }
  for (uint8_t& zi : z) {
    if (zi > 1) return absl::InvalidArgumentError("assignment must be 0/1");
  }
  Design design{CountArms(pop.clusters(), z, pop.num_clusters()),
                std::move(z)};
  if (absl::Status s = CheckCounts(pop, design.counts); !s.ok()) return s;
  return design;
}

ObservedData Observe(const Population& pop, const Design& design) {
  ObservedData obs;
  obs.space = pop.space();
  obs.num_clusters = pop.num_clusters();
  obs.cluster.assign(pop.clusters().begin(), pop.clusters().end());
  obs.z = design.z;
  obs.y.resize(pop.size());
  for (int i = 0; i < pop.size(); ++i) {
    obs.y[i] = pop.outcome_index(i, design.z[i]);
  }
  obs.counts = design.counts;
  obs.unit_ids = pop.shared_unit_ids();
  obs.cluster_labels = pop.shared_cluster_labels();
  return obs;
}

absl::StatusOr<ObservedData> MakeObservedData(
    OutcomeSpace space, std::vector<int> cluster, std::vector<uint8_t> z,
    std::vector<int> y, std::vector<std::string> unit_ids,
    std::vector<std::string> cluster_labels) {
  const size_t n = cluster.size();
  if (z.size() != n || y.size() != n || unit_ids.size() != n) {
    return absl::InvalidArgumentError("observed column lengths differ");
  }
  const int num_clusters = static_cast<int>(cluster_labels.size());
  for (size_t i = 0; i < n; ++i) {
    if (cluster[i] < 0 || cluster[i] >= num_clusters || z[i] > 1 || y[i] < 0 ||
        y[i] >= space.size()) {
      return absl::InvalidArgumentError(
          absl::StrCat("observed record ", i, " out of range"));
    }
  }
  ObservedData obs;
  obs.counts = CountArms(cluster, z, num_clusters);
  for (int c = 0; c < num_clusters; ++c) {
    if (obs.counts.treated[c] < 1 || obs.counts.control[c] < 1) {
      return absl::InvalidArgumentError(absl::StrCat(
          "empty treatment arm in cluster '", cluster_labels[c], "'"));
    }
  }
  obs.space = std::move(space);
  obs.num_clusters = num_clusters;
  obs.cluster = std::move(cluster);
  obs.z = std::move(z);
  obs.y = std::move(y);
  obs.unit_ids =
      std::make_shared<const std::vector<std::string>>(std::move(unit_ids));
  obs.cluster_labels = std::make_shared<const std::vector<std::string>>(
      std::move(cluster_labels));
  return obs;
}

}  // namespace clusterdp
