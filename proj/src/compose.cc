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
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "ctcrewrite/errors.h"
#include "ctcrewrite/fst_ops.h"

namespace ctcrewrite {
namespace {

// Per-state arc indices sorted by input or output label, built on first use.
class LabelIndex {
 public:
  LabelIndex(const Fst& fst, bool by_output)
      : fst_(fst), by_output_(by_output), sorted_(fst.NumStates()),
        built_(fst.NumStates(), false) {}

  const std::vector<uint32_t>& Sorted(StateId state) {
    if (!built_[state]) {
      auto& idx = sorted_[state];
      const auto arcs = fst_.Arcs(state);
      idx.resize(arcs.size());
      for (uint32_t i = 0; i < idx.size(); ++i) idx[i] = i;
      std::stable_sort(idx.begin(), idx.end(), [&](uint32_t x, uint32_t y) {
        return Key(arcs[x]) < Key(arcs[y]);
      });
      built_[state] = true;
    }
    return sorted_[state];
  }

  // [first, last) positions within Sorted(state) carrying `label`.
  std::pair<size_t, size_t> Range(StateId state, Label label) {
    const auto& idx = Sorted(state);
    const auto arcs = fst_.Arcs(state);
    auto lo = std::lower_bound(
        idx.begin(), idx.end(), label,
        [&](uint32_t i, Label l) { return Key(arcs[i]) < l; });
    auto hi = std::upper_bound(
        lo, idx.end(), label,
        [&](Label l, uint32_t i) { return l < Key(arcs[i]); });
    return {static_cast<size_t>(lo - idx.begin()),
            static_cast<size_t>(hi - idx.begin())};
  }

  Label Key(const Arc& arc) const {
    return by_output_ ? arc.olabel : arc.ilabel;
  }

 private:
  const Fst& fst_;
  bool by_output_;
  std::vector<std::vector<uint32_t>> sorted_;
  std::vector<bool> built_;
};

// Composition state: operand states plus the epsilon-sequencing filter.
// Filter 1 means the right operand has just moved alone on an epsilon, so
// the left operand may not move alone until a matching move resets it. This
// admits exactly one interleaving of epsilon moves per pair of paths.
struct Tuple {
  StateId left;
  StateId right;
  int filter;
};

struct TupleKeyHash {
  size_t operator()(uint64_t key) const {
    key ^= key >> 33;
    key *= 0xff51afd7ed558ccdULL;
    key ^= key >> 33;
    return static_cast<size_t>(key);
  }
};

class Composer {
 public:
  Composer(const Fst& left, const Fst& right, ComposeMode mode)
      : left_(left), right_(right), mode_(mode), left_index_(left, true),
        right_index_(right, false),
        out_(left.InputSymbols(), right.OutputSymbols()) {}

  Fst Run(std::vector<ComposeState>* origins) {
    if (left_.Empty() || right_.Empty()) return std::move(out_);
    out_.SetStart(FindState({left_.Start(), right_.Start(), 0}));
    for (size_t next = 0; next < tuples_.size(); ++next) {
      Expand(static_cast<StateId>(next));
    }
    std::vector<StateId> state_map;
    Fst trimmed = Connect(out_, origins ? &state_map : nullptr);
    if (origins) {
      origins->assign(trimmed.NumStates(), ComposeState{});
      for (size_t s = 0; s < state_map.size(); ++s) {
        if (state_map[s] != kNoState) {
          (*origins)[state_map[s]] = {tuples_[s].left, tuples_[s].right};
        }
      }
    }
    return trimmed;
  }

 private:
  StateId FindState(const Tuple& t) {
    const uint64_t key = (static_cast<uint64_t>(t.left) << 33) |
                         (static_cast<uint64_t>(t.right) << 1) |
                         static_cast<uint64_t>(t.filter);
    auto [it, inserted] = ids_.try_emplace(key, 0);
    if (inserted) {
      it->second = out_.AddState();
      tuples_.push_back(t);
    }
    return it->second;
  }

  void Emit(StateId src, Label ilabel, Label olabel, Weight w,
            const Tuple& dest) {
    const StateId d = FindState(dest);
    out_.AddArc(src, ilabel, olabel, w, d);
  }

  void Expand(StateId s) {
    const Tuple t = tuples_[s];
    const Weight left_final = left_.Final(t.left);
    const Weight right_final = right_.Final(t.right);
    if (!left_final.IsZero() && !right_final.IsZero()) {
      out_.SetFinal(s, Times(left_final, right_final));
    }
    const auto left_arcs = left_.Arcs(t.left);
    const auto right_arcs = right_.Arcs(t.right);
    const auto& left_sorted = left_index_.Sorted(t.left);
    const auto& right_sorted = right_index_.Sorted(t.right);

    const Label left_wild = mode_ == ComposeMode::kRhoLeft ? kRho : kEpsilon;
    const Label right_wild =
        mode_ == ComposeMode::kSigmaRight ? kSigma : kEpsilon;

    // Literal matches. Drive from the smaller side, binary search the other.
    auto literal = [&](Label l) {
      return l != kEpsilon && l != left_wild && l != right_wild;
    };
    if (left_sorted.size() <= right_sorted.size()) {
      for (size_t i = 0; i < left_sorted.size();) {
        const Label l = left_arcs[left_sorted[i]].olabel;
        size_t j = i;
        while (j < left_sorted.size() && left_arcs[left_sorted[j]].olabel == l)
          ++j;
        if (literal(l)) {
          auto [lo, hi] = right_index_.Range(t.right, l);
          for (size_t a = i; a < j; ++a) {
            const Arc& la = left_arcs[left_sorted[a]];
            for (size_t b = lo; b < hi; ++b) {
              const Arc& rb = right_arcs[right_sorted[b]];
              Emit(s, la.ilabel, rb.olabel, Times(la.weight, rb.weight),
                   {la.nextstate, rb.nextstate, 0});
            }
          }
        }
        i = j;
      }
    } else {
      for (size_t i = 0; i < right_sorted.size();) {
        const Label l = right_arcs[right_sorted[i]].ilabel;
        size_t j = i;
        while (j < right_sorted.size() &&
               right_arcs[right_sorted[j]].ilabel == l)
          ++j;
        if (literal(l)) {
          auto [lo, hi] = left_index_.Range(t.left, l);
          for (size_t a = lo; a < hi; ++a) {
            const Arc& la = left_arcs[left_sorted[a]];
            for (size_t b = i; b < j; ++b) {
              const Arc& rb = right_arcs[right_sorted[b]];
              Emit(s, la.ilabel, rb.olabel, Times(la.weight, rb.weight),
                   {la.nextstate, rb.nextstate, 0});
            }
          }
        }
        i = j;
      }
    }

    if (mode_ == ComposeMode::kSigmaRight) {
      auto [lo, hi] = right_index_.Range(t.right, kSigma);
      for (size_t b = lo; b < hi; ++b) {
        const Arc& rb = right_arcs[right_sorted[b]];
        for (const Arc& la : left_arcs) {
          if (la.olabel == kEpsilon) continue;
          const Label out = rb.olabel == kSigma ? la.olabel : rb.olabel;
          Emit(s, la.ilabel, out, Times(la.weight, rb.weight),
               {la.nextstate, rb.nextstate, 0});
        }
      }
    } else if (mode_ == ComposeMode::kRhoLeft) {
      auto [lo, hi] = left_index_.Range(t.left, kRho);
      for (size_t a = lo; a < hi; ++a) {
        const Arc& la = left_arcs[left_sorted[a]];
        for (const Arc& rb : right_arcs) {
          if (rb.ilabel == kEpsilon) continue;
          const Label in = la.ilabel == kRho ? rb.ilabel : la.ilabel;
          Emit(s, in, rb.olabel, Times(la.weight, rb.weight),
               {la.nextstate, rb.nextstate, 0});
        }
      }
    }

    if (t.filter == 0) {
      auto [lo, hi] = left_index_.Range(t.left, kEpsilon);
      for (size_t a = lo; a < hi; ++a) {
        const Arc& la = left_arcs[left_sorted[a]];
        Emit(s, la.ilabel, kEpsilon, la.weight, {la.nextstate, t.right, 0});
      }
    }
    {
      auto [lo, hi] = right_index_.Range(t.right, kEpsilon);
      for (size_t b = lo; b < hi; ++b) {
        const Arc& rb = right_arcs[right_sorted[b]];
        Emit(s, kEpsilon, rb.olabel, rb.weight, {t.left, rb.nextstate, 1});
      }
    }
  }

  const Fst& left_;
  const Fst& right_;
  ComposeMode mode_;
  LabelIndex left_index_;
  LabelIndex right_index_;
  Fst out_;
  std::vector<Tuple> tuples_;
  std::unordered_map<uint64_t, StateId, TupleKeyHash> ids_;
};

}  // namespace

Fst Compose(const Fst& left, const Fst& right, ComposeMode mode,
            std::vector<ComposeState>* origins) {
  if (!CompatibleSymbols(left.OutputSymbols(), right.InputSymbols())) {
    throw ConfigError(
        "compose: left output symbols differ from right input symbols");
  }
  Composer composer(left, right, mode);
  return composer.Run(origins);
}

}  // namespace ctcrewrite
