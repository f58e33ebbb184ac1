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

#ifndef CTCREWRITE_FST_TEXT_H_
#define CTCREWRITE_FST_TEXT_H_

#include <iosfwd>
#include <string>

#include "ctcrewrite/fst.h"

namespace ctcrewrite {

// AT&T text format. Arc lines are `src dst ilabel olabel [cost]`, final
// lines `state [cost]`; the source of the first line is the start state.
// Labels are written as symbols when the FST carries symbol tables, with
// the reserved labels spelled <eps>, <sigma> and <rho>. Costs use 9
// significant digits and are omitted when zero.
void WriteFstText(const Fst& fst, std::ostream& out);
std::string FstToText(const Fst& fst);
void WriteFstTextFile(const Fst& fst, const std::string& path);

// Parses the format above. Labels are looked up in the given tables when
// present, otherwise parsed as integers. Throws DataError on malformed
// lines and ConfigError on unknown symbols.
Fst ReadFstText(std::istream& in, SymbolTablePtr isyms = nullptr,
                SymbolTablePtr osyms = nullptr);
Fst ReadFstTextFile(const std::string& path, SymbolTablePtr isyms = nullptr,
                    SymbolTablePtr osyms = nullptr);

std::string FormatCost(double cost);

}  // namespace ctcrewrite

#endif  // CTCREWRITE_FST_TEXT_H_
