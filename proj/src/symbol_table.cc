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

#include "ctcrewrite/symbol_table.h"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "ctcrewrite/errors.h"

namespace ctcrewrite {

SymbolTable::SymbolTable() {
  for (std::string_view s : {kEpsilonSymbol, kSigmaSymbol, kRhoSymbol}) {
    ids_.emplace(std::string(s), static_cast<Label>(symbols_.size()));
    symbols_.emplace_back(s);
  }
}

Label SymbolTable::AddSymbol(std::string_view symbol) {
  if (auto id = Find(symbol)) return *id;
  if (symbol.empty()) throw ConfigError("empty symbol");
  const auto id = static_cast<Label>(symbols_.size());
  symbols_.emplace_back(symbol);
  ids_.emplace(std::string(symbol), id);
  return id;
}

std::optional<Label> SymbolTable::Find(std::string_view symbol) const {
  auto it = ids_.find(std::string(symbol));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

Label SymbolTable::FindOrThrow(std::string_view symbol) const {
  if (auto id = Find(symbol)) return *id;
  throw ConfigError("symbol not in table: " + std::string(symbol));
}

const std::string& SymbolTable::Symbol(Label label) const {
  if (label < 0 || label >= Size()) {
    throw ConfigError("label out of range: " + std::to_string(label));
  }
  return symbols_[label];
}

void SymbolTable::Write(std::ostream& out) const {
  for (Label id = kFirstUserLabel; id < Size(); ++id) {
    out << symbols_[id] << '\t' << id << '\n';
  }
}

SymbolTable SymbolTable::Read(std::istream& in) {
  SymbolTable table;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw DataError("symbol table line " + std::to_string(line_no) +
                      ": expected symbol<TAB>id");
    }
    const std::string symbol = line.substr(0, tab);
    Label id = 0;
    std::istringstream id_in(line.substr(tab + 1));
    if (!(id_in >> id)) {
      throw DataError("symbol table line " + std::to_string(line_no) +
                      ": bad id");
    }
    if (id < kFirstUserLabel) {
      throw DataError("symbol table line " + std::to_string(line_no) +
                      ": ids 0-2 are reserved");
    }
    if (id != table.Size() || table.Contains(symbol)) {
      throw DataError("symbol table line " + std::to_string(line_no) +
                      ": ids must be dense and symbols unique");
    }
    table.AddSymbol(symbol);
  }
  return table;
}

SymbolTable SymbolTable::ReadFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open symbol table: " + path);
  return Read(in);
}

void SymbolTable::WriteFile(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write symbol table: " + path);
  Write(out);
}

bool CompatibleSymbols(const SymbolTablePtr& a, const SymbolTablePtr& b) {
  if (!a || !b || a == b) return true;
  return *a == *b;
}

}  // namespace ctcrewrite
