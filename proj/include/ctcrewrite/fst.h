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

#ifndef CTCREWRITE_FST_H_
#define CTCREWRITE_FST_H_

#include <cstdint>
#include <span>
#include <vector>

#include "ctcrewrite/symbol_table.h"
#include "ctcrewrite/weight.h"

namespace ctcrewrite {

using StateId = int32_t;
inline constexpr StateId kNoState = -1;

struct Arc {
  Label ilabel = kEpsilon;
  Label olabel = kEpsilon;
  Weight weight = Weight::One();
  StateId nextstate = kNoState;

  friend bool operator==(const Arc&, const Arc&) = default;
};

// Mutable vector-backed weighted transducer. Algorithms take FSTs by const
// reference and return new ones, so a built FST is never modified again.
class Fst {
 public:
  Fst() = default;
  Fst(SymbolTablePtr isyms, SymbolTablePtr osyms)
      : isyms_(std::move(isyms)), osyms_(std::move(osyms)) {}

  StateId AddState();
  void SetStart(StateId state);
  void SetFinal(StateId state, Weight weight = Weight::One());
  void AddArc(StateId state, const Arc& arc);
  void AddArc(StateId state, Label ilabel, Label olabel, Weight weight,
              StateId nextstate) {
    AddArc(state, Arc{ilabel, olabel, weight, nextstate});
  }
  void ReserveStates(size_t n) { states_.reserve(n); }
  void DeleteArcs(StateId state) { states_[state].arcs.clear(); }

  StateId Start() const { return start_; }
  StateId NumStates() const { return static_cast<StateId>(states_.size()); }
  Weight Final(StateId state) const { return states_[state].final; }
  bool IsFinal(StateId state) const { return !states_[state].final.IsZero(); }
  std::span<const Arc> Arcs(StateId state) const { return states_[state].arcs; }
  std::span<Arc> MutableArcs(StateId state) { return states_[state].arcs; }
  size_t NumArcs(StateId state) const { return states_[state].arcs.size(); }
  size_t TotalArcs() const;
  bool Empty() const { return start_ == kNoState; }

  const SymbolTablePtr& InputSymbols() const { return isyms_; }
  const SymbolTablePtr& OutputSymbols() const { return osyms_; }
  void SetInputSymbols(SymbolTablePtr syms) { isyms_ = std::move(syms); }
  void SetOutputSymbols(SymbolTablePtr syms) { osyms_ = std::move(syms); }

  bool IsAcceptor() const;

  // Structural equality (states, arcs in order, finals, start).
  friend bool operator==(const Fst& a, const Fst& b);

 private:
  struct State {
    Weight final = Weight::Zero();
    std::vector<Arc> arcs;
  };

  std::vector<State> states_;
  StateId start_ = kNoState;
  SymbolTablePtr isyms_;
  SymbolTablePtr osyms_;
};

// Acceptor for a single label sequence; `cost` is placed on the final state.
Fst LinearAcceptor(std::span<const Label> labels, Weight cost,
                   SymbolTablePtr syms);

}  // namespace ctcrewrite

#endif  // CTCREWRITE_FST_H_
