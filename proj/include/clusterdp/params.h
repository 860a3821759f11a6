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

#ifndef CLUSTERDP_PARAMS_H_
#define CLUSTERDP_PARAMS_H_

#include <string_view>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "clusterdp/extended_real.h"

namespace clusterdp {

enum class MechanismKind {
  kClusterDp,
  kClusterFreeDp,
  kUniformPriorDp,
  kNoisyHt,
  kNoisyHistogram,
};

std::string_view KindName(MechanismKind kind);
absl::StatusOr<MechanismKind> ParseKind(std::string_view name);

// Knobs shared by the mechanisms, the accountant and the variance formulas.
// `sigma` is the Laplace scale multiplier (noise scale sigma / n_{a,c}); an
// infinite sigma is the infinite-noise limit. `epsilon` is only read by the
// two noisy-estimator baselines; infinite epsilon means no noise.
struct MechanismParams {
  MechanismKind kind = MechanismKind::kClusterDp;
  double gamma = 0;
  ExtendedReal sigma = 0;
  double lambda = 0;
  ExtendedReal epsilon = ExtendedReal::Infinity();
};

// Checks the parameter ranges relevant to `kind` over an outcome space of
// size `num_outcomes`.
absl::Status ValidateParams(const MechanismParams& params, int num_outcomes);

bool UsesPrior(MechanismKind kind);

}  // namespace clusterdp

#endif  // CLUSTERDP_PARAMS_H_
