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

#include "clusterdp/rng.h"

#include <cmath>

#include <boost/math/distributions/normal.hpp>

namespace clusterdp {
namespace {

uint64_t SplitMix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

uint64_t Fnv1a(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

double RngStream::Uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RngStream::OpenUniform() {
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

uint64_t RngStream::UniformIndex(uint64_t n) {
  // Rejection sampling on the largest multiple of n below 2^64.
  const uint64_t limit = -n % n;  // (2^64 - n) mod n == 2^64 mod n
  uint64_t x;
  do {
    x = engine_();
  } while (x < limit);
  return x % n;
}

double RngStream::Laplace(double scale) {
  const double u = OpenUniform() - 0.5;
  if (scale == 0.0) return 0.0;
  const double magnitude = -scale * std::log1p(-2.0 * std::fabs(u));
  return u < 0 ? -magnitude : magnitude;
}

double RngStream::StandardNormal() {
  static const boost::math::normal_distribution<double> kStandard;
  return boost::math::quantile(kStandard, OpenUniform());
}

uint64_t StreamFactory::DeriveSeed(std::string_view name,
                                   uint64_t index) const {
  uint64_t s = SplitMix64(master_seed_);
  s = SplitMix64(s ^ Fnv1a(name));
  s = SplitMix64(s ^ (index * 0xd1342543de82ef95ULL));
  return s;
}

}  // namespace clusterdp
