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

#include "ctcrewrite/fst_text.h"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "ctcrewrite/errors.h"

namespace ctcrewrite {
namespace {

std::string LabelText(Label label, const SymbolTablePtr& syms) {
  switch (label) {
    case kEpsilon:
      return std::string(kEpsilonSymbol);
    case kSigma:
      return std::string(kSigmaSymbol);
    case kRho:
      return std::string(kRhoSymbol);
    default:
      return syms ? syms->Symbol(label) : std::to_string(label);
  }
}

Label ParseLabel(const std::string& token, const SymbolTablePtr& syms,
                 int line_no) {
  if (token == kEpsilonSymbol) return kEpsilon;
  if (token == kSigmaSymbol) return kSigma;
  if (token == kRhoSymbol) return kRho;
  if (syms) {
    if (auto id = syms->Find(token)) return *id;
    throw ConfigError("line " + std::to_string(line_no) +
                      ": unknown symbol '" + token + "'");
  }
  char* end = nullptr;
  const long value = std::strtol(token.c_str(), &end, 10);
  if (*end != '\0' || value < 0) {
    throw DataError("line " + std::to_string(line_no) + ": bad label '" +
                    token + "'");
  }
  return static_cast<Label>(value);
}

StateId ParseState(const std::string& token, int line_no) {
  char* end = nullptr;
  const long value = std::strtol(token.c_str(), &end, 10);
  if (token.empty() || *end != '\0' || value < 0 || value > (1L << 30)) {
    throw DataError("line " + std::to_string(line_no) + ": bad state '" +
                    token + "'");
  }
  return static_cast<StateId>(value);
}

double ParseCost(const std::string& token, int line_no) {
  char* end = nullptr;
  const double value = std::strtod(token.c_str(), &end);
  if (token.empty() || *end != '\0') {
    throw DataError("line " + std::to_string(line_no) + ": bad cost '" +
                    token + "'");
  }
  return value;
}

void WriteState(const Fst& fst, StateId s, std::ostream& out) {
  for (const Arc& arc : fst.Arcs(s)) {
    out << s << '\t' << arc.nextstate << '\t'
        << LabelText(arc.ilabel, fst.InputSymbols()) << '\t'
        << LabelText(arc.olabel, fst.OutputSymbols());
    if (!arc.weight.IsOne()) out << '\t' << FormatCost(arc.weight.Value());
    out << '\n';
  }
  if (fst.IsFinal(s)) {
    out << s;
    if (!fst.Final(s).IsOne()) out << '\t' << FormatCost(fst.Final(s).Value());
    out << '\n';
  }
}

}  // namespace

std::string FormatCost(double cost) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", cost);
  return buf;
}

void WriteFstText(const Fst& fst, std::ostream& out) {
  if (fst.Empty()) return;
  WriteState(fst, fst.Start(), out);
  for (StateId s = 0; s < fst.NumStates(); ++s) {
    if (s != fst.Start()) WriteState(fst, s, out);
  }
}

std::string FstToText(const Fst& fst) {
  std::ostringstream out;
  WriteFstText(fst, out);
  return out.str();
}

void WriteFstTextFile(const Fst& fst, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write FST: " + path);
  WriteFstText(fst, out);
}

Fst ReadFstText(std::istream& in, SymbolTablePtr isyms, SymbolTablePtr osyms) {
  struct ArcLine {
    StateId src;
    Arc arc;
  };
  std::vector<ArcLine> arcs;
  std::vector<std::pair<StateId, double>> finals;
  StateId start = kNoState;
  StateId max_state = -1;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::vector<std::string> tok;
    for (std::string t; fields >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    const StateId src = ParseState(tok[0], line_no);
    if (start == kNoState) start = src;
    max_state = std::max(max_state, src);
    if (tok.size() <= 2) {
      finals.emplace_back(src, tok.size() == 2 ? ParseCost(tok[1], line_no)
                                               : 0.0);
    } else if (tok.size() == 4 || tok.size() == 5) {
      Arc arc;
      arc.nextstate = ParseState(tok[1], line_no);
      arc.ilabel = ParseLabel(tok[2], isyms, line_no);
      arc.olabel = ParseLabel(tok[3], osyms, line_no);
      if (tok.size() == 5) arc.weight = Weight(ParseCost(tok[4], line_no));
      max_state = std::max(max_state, arc.nextstate);
      arcs.push_back({src, arc});
    } else {
      throw DataError("line " + std::to_string(line_no) +
                      ": expected 1, 2, 4 or 5 fields");
    }
  }
  Fst fst(isyms, osyms);
  for (StateId s = 0; s <= max_state; ++s) fst.AddState();
  if (start != kNoState) fst.SetStart(start);
  for (const auto& a : arcs) fst.AddArc(a.src, a.arc);
  for (const auto& [s, cost] : finals) fst.SetFinal(s, Weight(cost));
  return fst;
}

Fst ReadFstTextFile(const std::string& path, SymbolTablePtr isyms,
                    SymbolTablePtr osyms) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open FST: " + path);
  return ReadFstText(in, std::move(isyms), std::move(osyms));
}

}  // namespace ctcrewrite
