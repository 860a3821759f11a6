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

#ifndef CLUSTERDP_OUTCOME_SPACE_H_
#define CLUSTERDP_OUTCOME_SPACE_H_

#include <optional>
#include <span>
#include <vector>

#include "absl/status/statusor.h"

namespace clusterdp {

// The finite response space. The ordering of `values()` fixes the index used
// by every histogram, prior, and randomization matrix in the library; data
// sets carry outcome indices and consult values only for arithmetic.
class OutcomeSpace {
 public:
  // Requires at least two strictly increasing, finite values.
  static absl::StatusOr<OutcomeSpace> Create(std::vector<double> values);

  // The integers lo, lo+1, ..., hi. Requires hi > lo.
  static OutcomeSpace IntegerRange(int lo, int hi);

  int size() const { return static_cast<int>(values_.size()); }
  double value(int index) const { return values_[index]; }
  std::span<const double> values() const { return values_; }

  // Exact match; outcome spaces are categorical.
  std::optional<int> IndexOf(double value) const;

  double max_abs() const { return max_abs_; }
  double l2_norm() const { return l2_norm_; }
  double sum_squares() const { return sum_squares_; }
  double mean() const { return mean_; }
  double mean_square() const { return mean_square_; }

  friend bool operator==(const OutcomeSpace& a, const OutcomeSpace& b) {
    return a.values_ == b.values_;
  }

 private:
  explicit OutcomeSpace(std::vector<double> values);

  std::vector<double> values_;
  double max_abs_ = 0;
  double l2_norm_ = 0;
  double sum_squares_ = 0;
  double mean_ = 0;
  double mean_square_ = 0;
};

}  // namespace clusterdp

#endif  // CLUSTERDP_OUTCOME_SPACE_H_
