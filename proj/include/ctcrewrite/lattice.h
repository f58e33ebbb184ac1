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

#ifndef CTCREWRITE_LATTICE_H_
#define CTCREWRITE_LATTICE_H_

#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ctcrewrite/fst.h"

namespace ctcrewrite {

inline constexpr std::string_view kWordStart = "\xe2\x96\x81";  // U+2581

bool StartsWord(std::string_view piece);

// One sausage slot: alternative wordpieces with their costs.
using Slot = std::vector<std::pair<std::string, double>>;

// States 0..n, slot i spanning i -> i+1. Throws ConfigError for an empty
// slot list or slot, or a wordpiece missing from `symbols`.
Fst BuildSausage(const std::vector<Slot>& slots, SymbolTablePtr symbols);

// Stand-in for acoustic-model posteriors. Each reference wordpiece maps to a
// slot whose first entry is the reference itself.
struct ConfusionModel {
  std::map<std::string, Slot> alternatives;
  uint64_t seed = 0;
  // Probability that the reference entry trades costs with a random
  // alternative in a slot, pushing it off the top.
  double flip_prob = 0.0;

  // Every piece maps to itself alone, cost 0.
  static ConfusionModel Identity(std::span<const std::string> pieces);
};

// Slots for `reference`, the reference entry demoted with probability
// flip_probs[i] at position i. Throws ConfigError for uncovered pieces.
std::vector<Slot> CorruptSlots(std::span<const std::string> reference,
                               const ConfusionModel& model,
                               std::span<const double> flip_probs,
                               std::mt19937_64& rng);

// Sausage for `reference` using the model's own flip probability and seed.
Fst Corrupt(std::span<const std::string> reference,
            const ConfusionModel& model, SymbolTablePtr symbols);

// Uniform double in [0, 1) from 53 random bits; stable across standard
// library implementations.
double UniformUnit(std::mt19937_64& rng);

// n paths sampled arc by arc from the start, arcs drawn with probability
// proportional to e^-cost (a final state's stop option counts as one more
// choice weighted by its final cost). Returns input label sequences.
std::vector<std::vector<Label>> SampleRandomPaths(const Fst& lattice, size_t n,
                                                  uint64_t seed);

// Concatenates wordpieces; the word-start marker opens a new word. Throws
// DataError when the first piece does not start a word.
std::string GlueWordpieces(std::span<const std::string> pieces);

// Union of linear word acceptors, each carrying its path cost on the final
// state. Throws ConfigError for words missing from `symbols`.
Fst WordsToLattice(const std::vector<std::vector<std::string>>& paths,
                   std::span<const double> costs, SymbolTablePtr symbols);

// {"slots": [[["piece", cost], ...], ...]}
std::string SlotsToJson(const std::vector<Slot>& slots);
std::vector<Slot> SlotsFromJson(const std::string& text);

// {"seed": n, "flip_prob": p, "alternatives": {"piece": [[alt, cost], ...]}}
std::string ConfusionModelToJson(const ConfusionModel& model);
ConfusionModel ConfusionModelFromJson(const std::string& text);

}  // namespace ctcrewrite

#endif  // CTCREWRITE_LATTICE_H_
