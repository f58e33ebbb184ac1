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

#include "ctcrewrite/lattice.h"

#include <cmath>
#include <json.hpp>

#include "ctcrewrite/errors.h"
#include "ctcrewrite/fst_ops.h"

namespace ctcrewrite {

using nlohmann::json;

bool StartsWord(std::string_view piece) {
  return piece.substr(0, kWordStart.size()) == kWordStart;
}

Fst BuildSausage(const std::vector<Slot>& slots, SymbolTablePtr symbols) {
  if (slots.empty()) throw ConfigError("sausage needs at least one slot");
  Fst fst(symbols, symbols);
  fst.ReserveStates(slots.size() + 1);
  for (size_t i = 0; i <= slots.size(); ++i) fst.AddState();
  fst.SetStart(0);
  fst.SetFinal(static_cast<StateId>(slots.size()));
  for (size_t i = 0; i < slots.size(); ++i) {
    if (slots[i].empty()) {
      throw ConfigError("empty sausage slot " + std::to_string(i));
    }
    for (const auto& [piece, cost] : slots[i]) {
      const Label l = symbols->FindOrThrow(piece);
      fst.AddArc(static_cast<StateId>(i), l, l, Weight(cost),
                 static_cast<StateId>(i + 1));
    }
  }
  return fst;
}

ConfusionModel ConfusionModel::Identity(std::span<const std::string> pieces) {
  ConfusionModel model;
  for (const auto& p : pieces) model.alternatives[p] = {{p, 0.0}};
  return model;
}

double UniformUnit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::vector<Slot> CorruptSlots(std::span<const std::string> reference,
                               const ConfusionModel& model,
                               std::span<const double> flip_probs,
                               std::mt19937_64& rng) {
  if (flip_probs.size() != reference.size()) {
    throw ConfigError("one flip probability per reference piece expected");
  }
  std::vector<Slot> slots;
  slots.reserve(reference.size());
  for (size_t i = 0; i < reference.size(); ++i) {
    auto it = model.alternatives.find(reference[i]);
    if (it == model.alternatives.end() || it->second.empty()) {
      throw ConfigError("confusion model does not cover wordpiece '" +
                        reference[i] + "'");
    }
    Slot slot = it->second;
    // Draw unconditionally so the stream does not depend on slot sizes.
    const double u = UniformUnit(rng);
    const uint64_t pick = rng();
    if (slot.size() > 1 && u < flip_probs[i]) {
      const size_t j = 1 + pick % (slot.size() - 1);
      std::swap(slot[0].second, slot[j].second);
    }
    slots.push_back(std::move(slot));
  }
  return slots;
}

Fst Corrupt(std::span<const std::string> reference,
            const ConfusionModel& model, SymbolTablePtr symbols) {
  std::mt19937_64 rng(model.seed);
  const std::vector<double> flips(reference.size(), model.flip_prob);
  return BuildSausage(CorruptSlots(reference, model, flips, rng),
                      std::move(symbols));
}

std::vector<std::vector<Label>> SampleRandomPaths(const Fst& lattice, size_t n,
                                                  uint64_t seed) {
  std::vector<std::vector<Label>> paths;
  if (n == 0 || lattice.Empty()) return paths;
  if (!IsAcyclic(lattice)) {
    throw CyclicInputError("random path sampling needs an acyclic lattice");
  }
  std::mt19937_64 rng(seed);
  paths.reserve(n);
  std::vector<double> probs;
  for (size_t i = 0; i < n; ++i) {
    std::vector<Label> path;
    StateId s = lattice.Start();
    while (true) {
      const auto arcs = lattice.Arcs(s);
      probs.clear();
      double total = 0.0;
      for (const Arc& a : arcs) {
        probs.push_back(std::exp(-a.weight.Value()));
        total += probs.back();
      }
      const double stop = std::exp(-lattice.Final(s).Value());
      total += stop;
      if (arcs.empty() || total <= 0) break;
      double u = UniformUnit(rng) * total;
      size_t j = 0;
      for (; j < probs.size(); ++j) {
        if (u < probs[j]) break;
        u -= probs[j];
      }
      if (j == probs.size()) {
        if (stop > 0) break;
        j = probs.size() - 1;  // rounding at the top end
      }
      if (arcs[j].ilabel != kEpsilon) path.push_back(arcs[j].ilabel);
      s = arcs[j].nextstate;
    }
    paths.push_back(std::move(path));
  }
  return paths;
}

std::string GlueWordpieces(std::span<const std::string> pieces) {
  if (pieces.empty() || !StartsWord(pieces.front())) {
    throw DataError("wordpiece path must start with a word-initial piece");
  }
  std::string out;
  for (const auto& p : pieces) {
    if (StartsWord(p)) {
      if (!out.empty()) out += ' ';
      out += p.substr(kWordStart.size());
    } else {
      out += p;
    }
  }
  return out;
}

Fst WordsToLattice(const std::vector<std::vector<std::string>>& paths,
                   std::span<const double> costs, SymbolTablePtr symbols) {
  if (paths.size() != costs.size()) {
    throw ConfigError("one cost per word path expected");
  }
  Fst fst(symbols, symbols);
  const StateId start = fst.AddState();
  fst.SetStart(start);
  for (size_t i = 0; i < paths.size(); ++i) {
    StateId s = start;
    for (const auto& w : paths[i]) {
      const Label l = symbols->FindOrThrow(w);
      const StateId t = fst.AddState();
      fst.AddArc(s, l, l, Weight::One(), t);
      s = t;
    }
    fst.SetFinal(s, Plus(fst.Final(s), Weight(costs[i]), Semiring::kLog));
  }
  return fst;
}

namespace {

json SlotToJson(const Slot& slot) {
  json arr = json::array();
  for (const auto& [piece, cost] : slot) arr.push_back({piece, cost});
  return arr;
}

Slot SlotFromJson(const json& arr) {
  Slot slot;
  for (const auto& e : arr) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_string() ||
        !e[1].is_number()) {
      throw DataError("slot entries must be [piece, cost] pairs");
    }
    slot.emplace_back(e[0].get<std::string>(), e[1].get<double>());
  }
  return slot;
}

json ParseJson(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(std::string("invalid JSON: ") + e.what());
  }
}

}  // namespace

std::string SlotsToJson(const std::vector<Slot>& slots) {
  json arr = json::array();
  for (const auto& s : slots) arr.push_back(SlotToJson(s));
  return json{{"slots", arr}}.dump();
}

std::vector<Slot> SlotsFromJson(const std::string& text) {
  const json doc = ParseJson(text);
  if (!doc.contains("slots") || !doc["slots"].is_array()) {
    throw DataError("slot document needs a \"slots\" array");
  }
  std::vector<Slot> slots;
  for (const auto& s : doc["slots"]) slots.push_back(SlotFromJson(s));
  return slots;
}

std::string ConfusionModelToJson(const ConfusionModel& model) {
  json alts = json::object();
  for (const auto& [piece, slot] : model.alternatives) {
    alts[piece] = SlotToJson(slot);
  }
  return json{{"seed", model.seed},
              {"flip_prob", model.flip_prob},
              {"alternatives", alts}}
      .dump();
}

ConfusionModel ConfusionModelFromJson(const std::string& text) {
  const json doc = ParseJson(text);
  ConfusionModel model;
  model.seed = doc.value("seed", uint64_t{0});
  model.flip_prob = doc.value("flip_prob", 0.0);
  if (!doc.contains("alternatives") || !doc["alternatives"].is_object()) {
    throw DataError("confusion model needs an \"alternatives\" object");
  }
  for (const auto& [piece, arr] : doc["alternatives"].items()) {
    Slot slot = SlotFromJson(arr);
    if (slot.empty()) throw DataError("empty alternatives for " + piece);
    double mass = 0.0;
    for (const auto& [p, c] : slot) mass += std::exp(-c);
    if (mass > 1.0 + 1e-6) {
      throw DataError("alternatives for " + piece + " exceed unit mass");
    }
    model.alternatives[piece] = std::move(slot);
  }
  return model;
}

}  // namespace ctcrewrite
