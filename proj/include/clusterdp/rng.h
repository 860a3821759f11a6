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

#ifndef CLUSTERDP_RNG_H_
#define CLUSTERDP_RNG_H_

#include <cstdint>
#include <random>
#include <string_view>

namespace clusterdp {

// A single reproducible stream of randomness. All continuous variates are
// produced by inverse-CDF transforms of one uniform draw each, so a given
// seed yields the same sequence on every platform.
class RngStream {
 public:
  explicit RngStream(uint64_t seed) : engine_(seed) {}

  uint64_t NextU64() { return engine_(); }

  // Uniform on [0, 1) with 53 bits of resolution.
  double Uniform();

  // Uniform on the open interval (0, 1).
  double OpenUniform();

  // Uniform integer in [0, n). Requires n > 0.
  uint64_t UniformIndex(uint64_t n);

  bool Bernoulli(double p) { return Uniform() < p; }

  // Laplace(0, scale): density exp(-|x|/scale) / (2 scale). Always consumes
  // exactly one uniform, also for scale == 0.
  double Laplace(double scale);

  double StandardNormal();

 private:
  std::mt19937_64 engine_;
};

// Derives independent named streams from one master seed. A stream depends
// only on (master seed, name, index), so adding replications or new stream
// names never perturbs existing ones.
class StreamFactory {
 public:
  explicit StreamFactory(uint64_t master_seed) : master_seed_(master_seed) {}

  uint64_t master_seed() const { return master_seed_; }

  RngStream Stream(std::string_view name, uint64_t index = 0) const {
    return RngStream(DeriveSeed(name, index));
  }

  // A factory whose streams are disjoint from this one's, e.g. one per
  // Monte Carlo replication.
  StreamFactory Child(std::string_view name, uint64_t index) const {
    return StreamFactory(DeriveSeed(name, index));
  }

  uint64_t DeriveSeed(std::string_view name, uint64_t index) const;

 private:
  uint64_t master_seed_;
};

// Stream names used by the library.
inline constexpr std::string_view kAssignmentStream = "assignment";
inline constexpr std::string_view kLaplaceStream = "laplace";
inline constexpr std::string_view kResamplingStream = "resampling";

}  // namespace clusterdp

#endif  // CLUSTERDP_RNG_H_
