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

#ifndef CTCREWRITE_SYMBOL_TABLE_H_
#define CTCREWRITE_SYMBOL_TABLE_H_

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ctcrewrite {

using Label = int32_t;

inline constexpr Label kEpsilon = 0;
inline constexpr Label kSigma = 1;
inline constexpr Label kRho = 2;
inline constexpr Label kFirstUserLabel = 3;

inline constexpr std::string_view kEpsilonSymbol = "<eps>";
inline constexpr std::string_view kSigmaSymbol = "<sigma>";
inline constexpr std::string_view kRhoSymbol = "<rho>";

inline bool IsSpecialLabel(Label label) { return label < kFirstUserLabel; }

// Bidirectional string <-> label map. Ids 0..2 are reserved for epsilon,
// sigma and rho; user symbols are numbered densely from 3.
class SymbolTable {
 public:
  SymbolTable();

  // Returns the id of `symbol`, adding it if needed.
  Label AddSymbol(std::string_view symbol);

  std::optional<Label> Find(std::string_view symbol) const;
  // Throws ConfigError for unknown symbols.
  Label FindOrThrow(std::string_view symbol) const;
  const std::string& Symbol(Label label) const;
  bool Contains(std::string_view symbol) const {
    return Find(symbol).has_value();
  }

  // Number of ids including the reserved ones.
  Label Size() const { return static_cast<Label>(symbols_.size()); }

  // `symbol<TAB>id` lines for user symbols only.
  void Write(std::ostream& out) const;
  static SymbolTable Read(std::istream& in);
  static SymbolTable ReadFile(const std::string& path);
  void WriteFile(const std::string& path) const;

  friend bool operator==(const SymbolTable& a, const SymbolTable& b) {
    return a.symbols_ == b.symbols_;
  }

 private:
  std::vector<std::string> symbols_;
  std::unordered_map<std::string, Label> ids_;
};

using SymbolTablePtr = std::shared_ptr<const SymbolTable>;

// True when both tables are set and equal, or at least one is unset.
bool CompatibleSymbols(const SymbolTablePtr& a, const SymbolTablePtr& b);

}  // namespace ctcrewrite

#endif  // CTCREWRITE_SYMBOL_TABLE_H_
