// Copyright (c) 2026 The ctcrewrite Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CTCREWRITE_WEIGHT_H_
#define CTCREWRITE_WEIGHT_H_

#include <cmath>
#include <limits>
#include <string_view>

namespace ctcrewrite {

enum class Semiring { kTropical, kLog };

// Parses "tropical" / "log".
Semiring ParseSemiring(std::string_view name);
std::string_view SemiringName(Semiring semiring);

// A cost in negative-log space. +inf is the semiring zero, 0 the one.
class Weight {
 public:
  constexpr Weight() = default;
  constexpr explicit Weight(double value) : value_(value) {}

  static constexpr Weight Zero() {
    return Weight(std::numeric_limits<double>::infinity());
  }
  static constexpr Weight One() { return Weight(0.0); }

  constexpr double Value() const { return value_; }
  bool IsZero() const { return std::isinf(value_) && value_ > 0; }
  bool IsOne() const { return value_ == 0.0; }

  friend constexpr bool operator==(Weight a, Weight b) {
    return a.value_ == b.value_;
  }

 private:
  double value_ = 0.0;
};

// times is the same in both semirings: cost addition.
inline Weight Times(Weight a, Weight b) {
  if (a.IsZero() || b.IsZero()) return Weight::Zero();
  return Weight(a.Value() + b.Value());
}

// Left division: the weight c with Times(b, c) == a. b must not be zero.
inline Weight Divide(Weight a, Weight b) {
  if (a.IsZero()) return Weight::Zero();
  return Weight(a.Value() - b.Value());
}

inline Weight Plus(Weight a, Weight b, Semiring semiring) {
  if (a.IsZero()) return b;
  if (b.IsZero()) return a;
  const double lo = std::min(a.Value(), b.Value());
  if (semiring == Semiring::kTropical) return Weight(lo);
  const double hi = std::max(a.Value(), b.Value());
  return Weight(lo - std::log1p(std::exp(lo - hi)));
}

// Kleene star: plus over all powers of w. Throws DivergenceError when the
// series does not converge (negative cost in tropical, cost <= 0 in log).
Weight Star(Weight w, Semiring semiring);

bool ApproxEqual(Weight a, Weight b, double delta = 1e-9);

}  // namespace ctcrewrite

#endif  // CTCREWRITE_WEIGHT_H_
