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

#ifndef CTCREWRITE_FST_OPS_H_
#define CTCREWRITE_FST_OPS_H_

#include <boost/multiprecision/cpp_int.hpp>
#include <cstddef>
#include <vector>

#include "ctcrewrite/fst.h"

namespace ctcrewrite {

// kExact is plain weighted composition. kSigmaRight lets a sigma input
// label of the right operand match any non-epsilon output label of the
// left operand; the matched label is substituted for sigma on both sides of
// the right arc. kRhoLeft lets a rho output label of the left operand match
// any non-epsilon input label of the right operand, substituting the label
// for rho on both sides of the left arc.
enum class ComposeMode { kExact, kSigmaRight, kRhoLeft };

struct ComposeState {
  StateId left = kNoState;
  StateId right = kNoState;
};

// Composes `left` and `right`. The result is trimmed (accessible and
// coaccessible states only). When `origins` is set it receives, per result
// state, the pair of operand states it was built from. Throws ConfigError
// when left's output symbols do not match right's input symbols.
Fst Compose(const Fst& left, const Fst& right,
            ComposeMode mode = ComposeMode::kExact,
            std::vector<ComposeState>* origins = nullptr);

inline constexpr size_t kDefaultDeterminizeBudget = 1'000'000;

// Weighted subset construction for an epsilon-free acceptor. Equal strings
// collapse to one path whose weight is the semiring plus of the originals.
// Throws BudgetExceededError after `max_states` output states.
Fst Determinize(const Fst& fst, Semiring semiring,
                size_t max_states = kDefaultDeterminizeBudget);

// Removes epsilon:epsilon arcs, preserving the weighted relation under
// `semiring`. Throws DivergenceError for epsilon cycles whose closure does
// not converge.
Fst RmEpsilon(const Fst& fst, Semiring semiring = Semiring::kLog);

// ilabel := olabel on every arc; input symbols become the output symbols.
Fst ProjectOutput(const Fst& fst);
Fst ProjectInput(const Fst& fst);
Fst Invert(const Fst& fst);

// Keeps accessible and coaccessible states. When `state_map` is set it
// receives old -> new ids (kNoState for removed states).
Fst Connect(const Fst& fst, std::vector<StateId>* state_map = nullptr);

// Union of FSTs sharing symbol tables, through a fresh start state with
// epsilon arcs.
Fst Union(std::span<const Fst> fsts);

// Topological order of all states; throws CyclicInputError on cycles.
std::vector<StateId> TopologicalOrder(const Fst& fst);
bool IsAcyclic(const Fst& fst);

// Forward (from start) and backward (to final) distances of an acyclic FST.
std::vector<Weight> ForwardDistances(const Fst& fst, Semiring semiring);
std::vector<Weight> BackwardDistances(const Fst& fst, Semiring semiring);

// Semiring plus over all accepting paths of an acyclic FST.
Weight ShortestDistance(const Fst& fst, Semiring semiring);

using BigInt = boost::multiprecision::cpp_int;

// Number of accepting paths of an acyclic FST.
BigInt PathCount(const Fst& fst);

struct WeightedPath {
  std::vector<Label> ilabels;  // epsilons dropped
  std::vector<Label> olabels;
  double cost = 0.0;

  friend bool operator==(const WeightedPath&, const WeightedPath&) = default;
};

// The n lowest-cost paths (tropical) of an acyclic FST, nondecreasing in
// cost; equal costs are ordered lexicographically by labels.
std::vector<WeightedPath> ShortestPaths(const Fst& fst, size_t n);

// Every accepting path of an acyclic FST, in DFS order. Intended for small
// machines; throws BudgetExceededError past `max_paths`.
std::vector<WeightedPath> EnumeratePaths(const Fst& fst,
                                         size_t max_paths = 1'000'000);

}  // namespace ctcrewrite

#endif  // CTCREWRITE_FST_OPS_H_
