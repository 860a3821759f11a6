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

#ifndef CLUSTERDP_RELEASE_H_
#define CLUSTERDP_RELEASE_H_

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "clusterdp/outcome_space.h"
#include "clusterdp/params.h"
#include "clusterdp/population.h"

namespace clusterdp {

// One length-K vector per (cluster, arm), stored contiguously. Used for the
// projected priors and for the released debiasing rows.
class ArmTable {
 public:
  ArmTable() = default;
  ArmTable(int num_clusters, int num_outcomes)
      : num_clusters_(num_clusters),
        num_outcomes_(num_outcomes),
        data_(static_cast<size_t>(num_clusters) * 2 * num_outcomes, 0.0) {}

  int num_clusters() const { return num_clusters_; }
  int num_outcomes() const { return num_outcomes_; }

  std::span<const double> row(int c, int arm) const {
    return std::span<const double>(data_).subspan(Offset(c, arm),
                                                  num_outcomes_);
  }
  std::span<double> mutable_row(int c, int arm) {
    return std::span<double>(data_).subspan(Offset(c, arm), num_outcomes_);
  }
  std::span<const double> data() const { return data_; }

  friend bool operator==(const ArmTable&, const ArmTable&) = default;

 private:
  size_t Offset(int c, int arm) const {
    return (static_cast<size_t>(c) * 2 + arm) * num_outcomes_;
  }

  int num_clusters_ = 0;
  int num_outcomes_ = 0;
  std::vector<double> data_;
};

// The projected prior q~_a(.|c) of every (cluster, arm).
using ProjectedPrior = ArmTable;

// Everything the central unit ships: privatized outcomes plus the debiasing
// row y^T Q^{-1}_{c,a} of every (cluster, arm). Estimators only ever see
// this type.
struct PrivatizedRelease {
  OutcomeSpace space = OutcomeSpace::IntegerRange(0, 1);
  MechanismParams params;
  int num_clusters = 0;
  std::shared_ptr<const std::vector<std::string>> unit_ids;
  std::shared_ptr<const std::vector<std::string>> cluster_labels;
  std::vector<int> cluster;
  std::vector<uint8_t> z;
  std::vector<int> y_tilde;  // outcome index
  ProjectedPrior prior;
  ArmTable debias;

  int size() const { return static_cast<int>(y_tilde.size()); }
  ArmCounts Counts() const;
};

}  // namespace clusterdp

#endif  // CLUSTERDP_RELEASE_H_
