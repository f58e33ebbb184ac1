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

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "ctcrewrite/errors.h"
#include "ctcrewrite/fst_ops.h"

namespace ctcrewrite {
namespace {

// Residuals are hashed after rounding to this quantum so that subsets whose
// residuals differ only by floating-point noise are merged.
constexpr double kResidualQuantum = 1e-10;

struct Element {
  StateId state;
  Weight residual;
};

using Subset = std::vector<Element>;

struct SubsetKey {
  std::vector<std::pair<StateId, int64_t>> items;
  friend bool operator<(const SubsetKey& a, const SubsetKey& b) {
    return a.items < b.items;
  }
};

SubsetKey KeyOf(const Subset& subset) {
  SubsetKey key;
  key.items.reserve(subset.size());
  for (const auto& e : subset) {
    key.items.emplace_back(
        e.state, static_cast<int64_t>(std::llround(e.residual.Value() /
                                                   kResidualQuantum)));
  }
  return key;
}

}  // namespace

Fst Determinize(const Fst& fst, Semiring semiring, size_t max_states) {
  if (!fst.IsAcceptor()) {
    throw ConfigError("determinize: input must be an acceptor");
  }
  Fst out(fst.InputSymbols(), fst.OutputSymbols());
  if (fst.Empty()) return out;
  for (StateId s = 0; s < fst.NumStates(); ++s) {
    for (const Arc& arc : fst.Arcs(s)) {
      if (arc.ilabel == kEpsilon) {
        throw ConfigError("determinize: input must be epsilon-free");
      }
    }
  }

  std::map<SubsetKey, StateId> ids;
  std::vector<Subset> subsets;
  auto find_state = [&](Subset subset) {
    std::sort(subset.begin(), subset.end(),
              [](const Element& a, const Element& b) {
                return a.state < b.state;
              });
    auto [it, inserted] = ids.try_emplace(KeyOf(subset), kNoState);
    if (inserted) {
      if (subsets.size() >= max_states) {
        throw BudgetExceededError("determinize: more than " +
                                  std::to_string(max_states) + " states");
      }
      it->second = out.AddState();
      subsets.push_back(std::move(subset));
    }
    return it->second;
  };

  out.SetStart(find_state({{fst.Start(), Weight::One()}}));
  for (size_t next = 0; next < subsets.size(); ++next) {
    const StateId src = static_cast<StateId>(next);
    // Copy: find_state may grow `subsets`.
    const Subset subset = subsets[next];

    Weight final = Weight::Zero();
    for (const auto& e : subset) {
      final = Plus(final, Times(e.residual, fst.Final(e.state)), semiring);
    }
    if (!final.IsZero()) out.SetFinal(src, final);

    // label -> destination state -> accumulated weight
    std::map<Label, std::map<StateId, Weight>> moves;
    for (const auto& e : subset) {
      for (const Arc& arc : fst.Arcs(e.state)) {
        const Weight w = Times(e.residual, arc.weight);
        if (w.IsZero()) continue;
        auto [it, inserted] = moves[arc.ilabel].try_emplace(arc.nextstate, w);
        if (!inserted) it->second = Plus(it->second, w, semiring);
      }
    }
    for (const auto& [label, dests] : moves) {
      Weight total = Weight::Zero();
      for (const auto& [state, w] : dests) total = Plus(total, w, semiring);
      Subset next_subset;
      next_subset.reserve(dests.size());
      for (const auto& [state, w] : dests) {
        next_subset.push_back({state, Divide(w, total)});
      }
      const StateId dest = find_state(std::move(next_subset));
      out.AddArc(src, label, label, total, dest);
    }
  }
  return out;
}

}  // namespace ctcrewrite
