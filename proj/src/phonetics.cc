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

#include "ctcrewrite/phonetics.h"

#include <cmath>
#include <fstream>
#include <sstream>

#include "ctcrewrite/errors.h"

namespace ctcrewrite {

PhonemeInventory PhonemeInventory::Read(std::istream& in) {
  PhonemeInventory inventory;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const size_t tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) {
      throw DataError("phoneme file line " + std::to_string(line_no) +
                      ": expected xsampa<TAB>features");
    }
    std::istringstream fields(line.substr(tab + 1));
    FeatureVector f;
    if (!(fields >> f.place >> f.manner >> f.height >> f.position >>
          f.length)) {
      throw DataError("phoneme file line " + std::to_string(line_no) +
                      ": expected 5 reals");
    }
    std::string extra;
    if (fields >> extra) {
      throw DataError("phoneme file line " + std::to_string(line_no) +
                      ": trailing fields");
    }
    for (double v : {f.place, f.manner, f.height, f.position, f.length}) {
      if (!std::isfinite(v)) {
        throw DataError("phoneme file line " + std::to_string(line_no) +
                        ": non-finite feature");
      }
    }
    inventory.Add(line.substr(0, tab), f);
  }
  if (inventory.Size() == 0) throw DataError("empty phoneme inventory");
  return inventory;
}

PhonemeInventory PhonemeInventory::ReadFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open phoneme file: " + path);
  return Read(in);
}

void PhonemeInventory::Add(std::string_view phoneme,
                           const FeatureVector& features) {
  std::string key(phoneme);
  if (index_.count(key)) throw DataError("duplicate phoneme: " + key);
  index_.emplace(key, phonemes_.size());
  phonemes_.push_back(key);
  features_.push_back(features);
  auto syms = std::make_shared<SymbolTable>(
      symbols_ ? *symbols_ : SymbolTable());
  syms->AddSymbol(key);
  symbols_ = std::move(syms);
}

bool PhonemeInventory::Contains(std::string_view phoneme) const {
  return index_.count(std::string(phoneme)) > 0;
}

const FeatureVector& PhonemeInventory::Features(
    std::string_view phoneme) const {
  auto it = index_.find(std::string(phoneme));
  if (it == index_.end()) {
    throw InventoryError("unknown phoneme: " + std::string(phoneme));
  }
  return features_[it->second];
}

double PhonemeInventory::Distance(std::string_view p,
                                  std::string_view q) const {
  const FeatureVector& a = Features(p);
  const FeatureVector& b = Features(q);
  const double d[] = {a.place - b.place, a.manner - b.manner,
                      a.height - b.height, a.position - b.position,
                      a.length - b.length};
  double sum = 0.0;
  for (double x : d) sum += x * x;
  return std::sqrt(sum);
}

double FeatureDistance(const PhonemeInventory& inventory, std::string_view p,
                       std::string_view q) {
  return inventory.Distance(p, q);
}

Fst BuildPhonemeExpander(const PhonemeInventory& inventory, double tau,
                         double lambda) {
  if (tau < 0) throw ConfigError("tau must be non-negative");
  if (!(lambda > 0)) throw ConfigError("lambda must be positive");
  const SymbolTablePtr& syms = inventory.Symbols();
  Fst fst(syms, syms);
  const StateId s = fst.AddState();
  fst.SetStart(s);
  fst.SetFinal(s);
  const auto& phonemes = inventory.Phonemes();
  for (const std::string& p : phonemes) {
    const Label lp = syms->FindOrThrow(p);
    fst.AddArc(s, lp, lp, Weight::One(), s);
    for (const std::string& q : phonemes) {
      const double d = inventory.Distance(p, q);
      if (d > 0 && d <= tau) {
        fst.AddArc(s, lp, syms->FindOrThrow(q), Weight(lambda * d), s);
      }
    }
  }
  return fst;
}

Fst BuildEditFst(int k, double unit_cost, SymbolTablePtr symbols) {
  if (k < 0) throw ConfigError("edit budget k must be non-negative");
  if (!(unit_cost > 0)) throw ConfigError("unit_cost must be positive");
  Fst fst(symbols, symbols);
  for (int i = 0; i <= k; ++i) {
    fst.AddState();
    fst.SetFinal(i);
  }
  fst.SetStart(0);
  const Weight edit(unit_cost);
  for (int i = 0; i <= k; ++i) {
    fst.AddArc(i, kSigma, kSigma, Weight::One(), i);
    if (i == k) continue;
    fst.AddArc(i, kEpsilon, kRho, edit, i + 1);
    fst.AddArc(i, kSigma, kEpsilon, edit, i + 1);
    fst.AddArc(i, kSigma, kRho, edit, i + 1);
  }
  return fst;
}

}  // namespace ctcrewrite
