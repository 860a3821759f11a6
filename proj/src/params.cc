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

#include "clusterdp/params.h"

#include <cmath>

#include "absl/strings/str_cat.h"

namespace clusterdp {

std::string_view KindName(MechanismKind kind) {
  switch (kind) {
    case MechanismKind::kClusterDp:
      return "cluster-dp";
    case MechanismKind::kClusterFreeDp:
      return "cluster-free-dp";
    case MechanismKind::kUniformPriorDp:
      return "uniform-prior-dp";
    case MechanismKind::kNoisyHt:
      return "noisy-ht";
    case MechanismKind::kNoisyHistogram:
      return "noisy-histogram";
  }
  return "unknown";
}

absl::StatusOr<MechanismKind> ParseKind(std::string_view name) {
  for (MechanismKind kind :
       {MechanismKind::kClusterDp, MechanismKind::kClusterFreeDp,
        MechanismKind::kUniformPriorDp, MechanismKind::kNoisyHt,
        MechanismKind::kNoisyHistogram}) {
    if (KindName(kind) == name) return kind;
  }
  return absl::InvalidArgumentError(
      absl::StrCat("unknown mechanism '", std::string(name), "'"));
}

bool UsesPrior(MechanismKind kind) {
  return kind == MechanismKind::kClusterDp ||
         kind == MechanismKind::kClusterFreeDp ||
         kind == MechanismKind::kUniformPriorDp;
}

absl::Status ValidateParams(const MechanismParams& params, int num_outcomes) {
  if (!UsesPrior(params.kind)) {
    if (params.epsilon.is_finite() &&
        !(params.epsilon.value() > 0 && std::isfinite(params.epsilon.value()))) {
      return absl::InvalidArgumentError("epsilon must be positive");
    }
    return absl::OkStatus();
  }
  if (!(params.lambda >= 0 && params.lambda <= 1)) {
    return absl::InvalidArgumentError(
        absl::StrCat("lambda must lie in [0, 1], got ", params.lambda));
  }
  if (params.kind == MechanismKind::kUniformPriorDp) return absl::OkStatus();
  // A small tolerance admits gamma = 1.0 / K computed in floating point.
  if (!(params.gamma >= 0 && params.gamma * num_outcomes <= 1 + 1e-12)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "gamma must lie in [0, 1/K] with K = ", num_outcomes, ", got ",
        params.gamma));
  }
  if (params.sigma.is_finite() &&
      !(params.sigma.value() >= 0 && std::isfinite(params.sigma.value()))) {
    return absl::InvalidArgumentError("sigma must be non-negative");
  }
  return absl::OkStatus();
}

}  // namespace clusterdp
