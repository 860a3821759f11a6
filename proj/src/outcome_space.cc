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

#include "clusterdp/outcome_space.h"

#include <algorithm>
#include <cmath>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace clusterdp {

absl::StatusOr<OutcomeSpace> OutcomeSpace::Create(std::vector<double> values) {
  if (values.size() < 2) {
    return absl::InvalidArgumentError(
        absl::StrCat("outcome space needs at least 2 values, got ",
                     values.size()));
  }
  for (size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      return absl::InvalidArgumentError("outcome values must be finite");
    }
    if (i > 0 && !(values[i - 1] < values[i])) {
      return absl::InvalidArgumentError(
          "outcome values must be distinct and strictly increasing");
    }
  }
  return OutcomeSpace(std::move(values));
}

OutcomeSpace OutcomeSpace::IntegerRange(int lo, int hi) {
  std::vector<double> values;
  values.reserve(hi - lo + 1);
  for (int v = lo; v <= hi; ++v) values.push_back(v);
  return OutcomeSpace(std::move(values));
}

OutcomeSpace::OutcomeSpace(std::vector<double> values)
    : values_(std::move(values)) {
  double sum = 0;
  for (double v : values_) {
    max_abs_ = std::max(max_abs_, std::fabs(v));
    sum += v;
    sum_squares_ += v * v;
  }
  l2_norm_ = std::sqrt(sum_squares_);
  mean_ = sum / size();
  mean_square_ = sum_squares_ / size();
}

std::optional<int> OutcomeSpace::IndexOf(double value) const {
  auto it = std::lower_bound(values_.begin(), values_.end(), value);
  if (it == values_.end() || *it != value) return std::nullopt;
  return static_cast<int>(it - values_.begin());
}

}  // namespace clusterdp
