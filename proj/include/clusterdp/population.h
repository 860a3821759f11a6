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

#ifndef CLUSTERDP_POPULATION_H_
#define CLUSTERDP_POPULATION_H_

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "clusterdp/outcome_space.h"
#include "clusterdp/rng.h"

namespace clusterdp {

inline constexpr int kMinClusterSize = 2;

// One row of a population file, before validation. `line` is the 1-based
// source line, or 0 when the record did not come from a file.
struct PopulationRecord {
  std::string unit_id;
  std::string cluster;
  double y0 = 0;
  double y1 = 0;
  int line = 0;
};

// Returns every problem found; the list is empty iff the records form a
// valid population over `space`.
std::vector<std::string> ValidatePopulation(
    std::span<const PopulationRecord> records, const OutcomeSpace& space);

// A fixed population of units with both potential outcomes. Outcomes are
// stored as indices into the outcome space and clusters as dense ids
// 0..C-1. Immutable once built.
class Population {
 public:
  // Validates the records and densifies cluster labels in order of first
  // appearance.
  static absl::StatusOr<Population> FromRecords(
      std::span<const PopulationRecord> records, OutcomeSpace space);

  // Builds from dense arrays. Unit ids default to "u<i>" and cluster labels
  // to "<c>".
  static absl::StatusOr<Population> Create(
      OutcomeSpace space, std::vector<int> cluster, std::vector<int> y0,
      std::vector<int> y1, std::vector<std::string> unit_ids = {},
      std::vector<std::string> cluster_labels = {});

  const OutcomeSpace& space() const { return space_; }
  int size() const { return static_cast<int>(cluster_.size()); }
  int num_clusters() const { return static_cast<int>(members_.size()); }

  int cluster(int unit) const { return cluster_[unit]; }
  int y0_index(int unit) const { return y0_[unit]; }
  int y1_index(int unit) const { return y1_[unit]; }
  int outcome_index(int unit, int arm) const {
    return arm == 1 ? y1_[unit] : y0_[unit];
  }
  double y0(int unit) const { return space_.value(y0_[unit]); }
  double y1(int unit) const { return space_.value(y1_[unit]); }
  double outcome(int unit, int arm) const {
    return space_.value(outcome_index(unit, arm));
  }

  std::span<const int> clusters() const { return cluster_; }
  std::span<const int> members(int c) const { return members_[c]; }
  int cluster_size(int c) const {
    return static_cast<int>(members_[c].size());
  }

  const std::string& unit_id(int unit) const { return (*unit_ids_)[unit]; }
  const std::string& cluster_label(int c) const {
    return (*cluster_labels_)[c];
  }
  std::shared_ptr<const std::vector<std::string>> shared_unit_ids() const {
    return unit_ids_;
  }
  std::shared_ptr<const std::vector<std::string>> shared_cluster_labels()
      const {
    return cluster_labels_;
  }

  // Finite-population average treatment effect.
  double Ate() const;

  // The same units regarded as one single cluster.
  Population Pooled() const;

  // The subset of units at `indices` (ascending), keeping cluster ids.
  absl::StatusOr<Population> Subset(std::span<const int> indices) const;

 private:
  Population() = default;

  OutcomeSpace space_ = OutcomeSpace::IntegerRange(0, 1);
  std::vector<int> cluster_;
  std::vector<int> y0_;
  std::vector<int> y1_;
  std::vector<std::vector<int>> members_;
  std::shared_ptr<const std::vector<std::string>> unit_ids_;
  std::shared_ptr<const std::vector<std::string>> cluster_labels_;
};

// Number of treated and control units per cluster.
struct ArmCounts {
  std::vector<int> treated;
  std::vector<int> control;

  int num_clusters() const { return static_cast<int>(treated.size()); }
  int count(int c, int arm) const {
    return arm == 1 ? treated[c] : control[c];
  }
  int cluster_size(int c) const { return treated[c] + control[c]; }
  int total() const;
  int total_treated() const;
};

// floor(n_c / 2) treated units per cluster.
ArmCounts BalancedCounts(const Population& pop);

// round(fraction_c * n_c) treated units per cluster; fails if any arm would
// be empty.
absl::StatusOr<ArmCounts> CountsFromFractions(const Population& pop,
                                              std::span<const double> fractions);

// Checks that every cluster has both arms non-empty and sizes match `pop`.
absl::Status CheckCounts(const Population& pop, const ArmCounts& counts);

// A completely randomized design within clusters.
struct Design {
  ArmCounts counts;
  std::vector<uint8_t> z;
};

// Draws exactly counts.treated[c] treated units uniformly at random within
// each cluster.
absl::StatusOr<Design> DrawDesign(const Population& pop,
                                  const ArmCounts& counts, RngStream& rng);

// Wraps an explicit assignment, deriving the counts.
absl::StatusOr<Design> DesignFromAssignment(const Population& pop,
                                            std::vector<uint8_t> z);

// What an experimenter observes: cluster, assignment and the outcome under
// the assigned arm. This is the only input the privatization mechanisms see.
struct ObservedData {
  OutcomeSpace space = OutcomeSpace::IntegerRange(0, 1);
  int num_clusters = 0;
  std::vector<int> cluster;
  std::vector<uint8_t> z;
  std::vector<int> y;  // outcome index
  ArmCounts counts;
  std::shared_ptr<const std::vector<std::string>> unit_ids;
  std::shared_ptr<const std::vector<std::string>> cluster_labels;

  int size() const { return static_cast<int>(y.size()); }
};

ObservedData Observe(const Population& pop, const Design& design);

// Builds observed data directly, e.g. from an observed-data file. Fails when
// an arm is empty in some cluster.
absl::StatusOr<ObservedData> MakeObservedData(
    OutcomeSpace space, std::vector<int> cluster, std::vector<uint8_t> z,
    std::vector<int> y, std::vector<std::string> unit_ids,
    std::vector<std::string> cluster_labels);

}  // namespace clusterdp

#endif  // CLUSTERDP_POPULATION_H_
