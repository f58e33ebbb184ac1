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

#include "ctcrewrite/weight.h"

#include <string>

#include "ctcrewrite/errors.h"

namespace ctcrewrite {

Semiring ParseSemiring(std::string_view name) {
  if (name == "tropical") return Semiring::kTropical;
  if (name == "log") return Semiring::kLog;
  throw ConfigError("unknown semiring: " + std::string(name));
}

std::string_view SemiringName(Semiring semiring) {
  return semiring == Semiring::kTropical ? "tropical" : "log";
}

Weight Star(Weight w, Semiring semiring) {
  if (w.IsZero()) return Weight::One();
  if (semiring == Semiring::kTropical) {
    if (w.Value() < 0) throw DivergenceError("negative-cost cycle");
    return Weight::One();
  }
  if (w.Value() <= 0) throw DivergenceError("cycle mass >= 1 in log semiring");
  // -log(1 / (1 - e^-w))
  return Weight(std::log(-std::expm1(-w.Value())));
}

bool ApproxEqual(Weight a, Weight b, double delta) {
  if (a.IsZero() || b.IsZero()) return a.IsZero() && b.IsZero();
  return std::abs(a.Value() - b.Value()) <= delta;
}

}  // namespace ctcrewrite
