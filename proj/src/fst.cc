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

#include "ctcrewrite/fst.h"

#include <string>

#include "ctcrewrite/errors.h"

namespace ctcrewrite {

StateId Fst::AddState() {
  states_.emplace_back();
  return static_cast<StateId>(states_.size() - 1);
}

void Fst::SetStart(StateId state) {
  if (state < 0 || state >= NumStates()) {
    throw InternalError("start state out of range");
  }
  start_ = state;
}

void Fst::SetFinal(StateId state, Weight weight) {
  states_.at(state).final = weight;
}

void Fst::AddArc(StateId state, const Arc& arc) {
  if (arc.nextstate < 0 || arc.nextstate >= NumStates()) {
    throw InternalError("arc destination out of range: " +
                        std::to_string(arc.nextstate));
  }
  states_.at(state).arcs.push_back(arc);
}

size_t Fst::TotalArcs() const {
  size_t n = 0;
  for (const auto& s : states_) n += s.arcs.size();
  return n;
}

bool Fst::IsAcceptor() const {
  for (const auto& s : states_) {
    for (const auto& arc : s.arcs) {
      if (arc.ilabel != arc.olabel) return false;
    }
  }
  return true;
}

bool operator==(const Fst& a, const Fst& b) {
  if (a.start_ != b.start_ || a.states_.size() != b.states_.size()) {
    return false;
  }
  for (size_t s = 0; s < a.states_.size(); ++s) {
    if (!(a.states_[s].final == b.states_[s].final)) return false;
    if (a.states_[s].arcs != b.states_[s].arcs) return false;
  }
  return true;
}

Fst LinearAcceptor(std::span<const Label> labels, Weight cost,
                   SymbolTablePtr syms) {
  Fst fst(syms, syms);
  StateId state = fst.AddState();
  fst.SetStart(state);
  for (Label label : labels) {
    const StateId next = fst.AddState();
    fst.AddArc(state, label, label, Weight::One(), next);
    state = next;
  }
  fst.SetFinal(state, cost);
  return fst;
}

}  // namespace ctcrewrite
