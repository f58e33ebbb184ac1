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

#ifndef CTCREWRITE_PHONETICS_H_
#define CTCREWRITE_PHONETICS_H_

#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ctcrewrite/fst.h"

namespace ctcrewrite {

struct FeatureVector {
  double place = 0.0;
  double manner = 0.0;
  double height = 0.0;
  double position = 0.0;
  double length = 0.0;
};

// X-SAMPA phonemes with articulatory coordinates. The phoneme symbol table
// numbers phonemes in inventory order from the first user label.
class PhonemeInventory {
 public:
  PhonemeInventory() = default;

  // Lines `xsampa<TAB>place manner height position length`; blank lines and
  // lines starting with '#' are skipped. Throws DataError on bad lines or
  // duplicates.
  static PhonemeInventory Read(std::istream& in);
  static PhonemeInventory ReadFile(const std::string& path);

  void Add(std::string_view phoneme, const FeatureVector& features);

  const std::vector<std::string>& Phonemes() const { return phonemes_; }
  size_t Size() const { return phonemes_.size(); }
  bool Contains(std::string_view phoneme) const;
  // Throws InventoryError for unknown phonemes.
  const FeatureVector& Features(std::string_view phoneme) const;

  // Euclidean distance between feature vectors.
  double Distance(std::string_view p, std::string_view q) const;

  const SymbolTablePtr& Symbols() const { return symbols_; }

 private:
  std::vector<std::string> phonemes_;
  std::vector<FeatureVector> features_;
  std::unordered_map<std::string, size_t> index_;
  SymbolTablePtr symbols_;
};

double FeatureDistance(const PhonemeInventory& inventory, std::string_view p,
                       std::string_view q);

// Single-state transducer: p:p at cost 0 for every phoneme and p:q at cost
// lambda * d(p, q) for every pair with 0 < d(p, q) <= tau.
Fst BuildPhonemeExpander(const PhonemeInventory& inventory, double tau,
                         double lambda);

// k+1 states, all final. Each state keeps sigma:sigma at cost 0; state i < k
// steps to i+1 through epsilon:rho (insertion), sigma:epsilon (deletion) and
// sigma:rho (substitution), each at `unit_cost`.
Fst BuildEditFst(int k, double unit_cost, SymbolTablePtr symbols);

}  // namespace ctcrewrite

#endif  // CTCREWRITE_PHONETICS_H_
