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

#ifndef CLUSTERDP_EXTENDED_REAL_H_
#define CLUSTERDP_EXTENDED_REAL_H_

#include <compare>
#include <string>

namespace clusterdp {

// A non-negative real number that may also be +infinity. Infinity is carried
// as an explicit tag so that it never arises from, or leaks into, floating
// point overflow.
class ExtendedReal {
 public:
  constexpr ExtendedReal() = default;
  constexpr ExtendedReal(double value) : value_(value) {}  // NOLINT

  static constexpr ExtendedReal Infinity() {
    ExtendedReal r;
    r.infinite_ = true;
    return r;
  }

  constexpr bool is_infinite() const { return infinite_; }
  constexpr bool is_finite() const { return !infinite_; }

  // Only meaningful when finite.
  constexpr double value() const { return value_; }

  // 1/x with 1/0 = inf and 1/inf = 0.
  constexpr ExtendedReal Reciprocal() const {
    if (infinite_) return ExtendedReal(0.0);
    if (value_ == 0.0) return Infinity();
    return ExtendedReal(1.0 / value_);
  }

  friend constexpr ExtendedReal operator+(ExtendedReal a, ExtendedReal b) {
    if (a.infinite_ || b.infinite_) return Infinity();
    return ExtendedReal(a.value_ + b.value_);
  }

  friend constexpr bool operator==(ExtendedReal a, ExtendedReal b) {
    if (a.infinite_ || b.infinite_) return a.infinite_ == b.infinite_;
    return a.value_ == b.value_;
  }

  friend constexpr std::partial_ordering operator<=>(ExtendedReal a,
                                                     ExtendedReal b) {
    if (a.infinite_ && b.infinite_) return std::partial_ordering::equivalent;
    if (a.infinite_) return std::partial_ordering::greater;
    if (b.infinite_) return std::partial_ordering::less;
    return a.value_ <=> b.value_;
  }

  // "inf" or the shortest round-trip decimal representation.
  std::string ToString() const;

 private:
  double value_ = 0.0;
  bool infinite_ = false;
};

constexpr ExtendedReal Min(ExtendedReal a, ExtendedReal b) {
  return (a < b) ? a : b;
}

// Shortest decimal string that parses back to exactly `value`.
std::string FormatDouble(double value);

}  // namespace clusterdp

#endif  // CLUSTERDP_EXTENDED_REAL_H_
