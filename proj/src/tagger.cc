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
#include <deque>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "ctcrewrite/errors.h"
#include "ctcrewrite/fst_ops.h"
#include "ctcrewrite/lattice.h"
#include "ctcrewrite/rewrite.h"

namespace ctcrewrite {

using nlohmann::json;

Grammar Grammar::FromJson(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(std::string("invalid grammar JSON: ") + e.what());
  }
  Grammar g;
  if (!doc.contains("class") || !doc["class"].is_string() ||
      doc["class"].get<std::string>().empty()) {
    throw DataError("grammar needs a non-empty \"class\"");
  }
  g.class_name = doc["class"].get<std::string>();
  if (!doc.contains("patterns") || !doc["patterns"].is_array() ||
      doc["patterns"].empty()) {
    throw DataError("grammar needs a non-empty \"patterns\" array");
  }
  for (const auto& p : doc["patterns"]) {
    std::vector<std::string> tokens;
    int slots = 0;
    for (const auto& t : p) {
      if (!t.is_string() || t.get<std::string>().empty()) {
        throw DataError("grammar tokens must be non-empty strings");
      }
      tokens.push_back(t.get<std::string>());
      slots += tokens.back() == kSlotToken;
    }
    if (slots != 1) {
      throw DataError("each grammar pattern needs exactly one slot");
    }
    if (tokens.size() < 2) {
      throw DataError("each grammar pattern needs a carrier token");
    }
    g.patterns.push_back(std::move(tokens));
  }
  return g;
}

Grammar Grammar::ReadFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open grammar: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return FromJson(ss.str());
}

std::string Grammar::ToJson() const {
  return json{{"class", class_name}, {"patterns", patterns}}.dump();
}

namespace {

std::vector<Label> CarrierLabels(const std::vector<std::string>& words,
                                 TaggerLevel level, const SymbolTable& syms,
                                 const WordpieceModel* wpm) {
  std::vector<Label> out;
  for (const auto& w : words) {
    if (level == TaggerLevel::kWord) {
      out.push_back(syms.FindOrThrow(w));
      continue;
    }
    for (const auto& piece : wpm->Segment(w)) {
      out.push_back(syms.FindOrThrow(piece));
    }
  }
  return out;
}

StateId AddChain(Fst& fst, StateId from, const std::vector<Label>& labels) {
  for (Label l : labels) {
    const StateId next = fst.AddState();
    fst.AddArc(from, l, l, Weight::One(), next);
    from = next;
  }
  return from;
}

}  // namespace

Fst CompileTagger(const Grammar& grammar, TaggerLevel level,
                  SymbolTablePtr symbols, const WordpieceModel* wpm) {
  if (grammar.patterns.empty()) throw ConfigError("empty grammar");
  if (level == TaggerLevel::kWordpiece && !wpm) {
    throw ConfigError("wordpiece tagger needs a wordpiece model");
  }
  const Label open = symbols->FindOrThrow(grammar.OpenTag());
  const Label close = symbols->FindOrThrow(grammar.CloseTag());
  std::vector<Label> word_starts;
  if (level == TaggerLevel::kWordpiece) {
    for (const auto& p : wpm->Pieces()) {
      if (StartsWord(p)) word_starts.push_back(symbols->FindOrThrow(p));
    }
    std::sort(word_starts.begin(), word_starts.end());
  }
  Fst fst(symbols, symbols);
  const StateId start = fst.AddState();
  fst.SetStart(start);
  fst.AddArc(start, kSigma, kSigma, Weight::One(), start);
  for (const auto& pattern : grammar.patterns) {
    const auto slot = std::find(pattern.begin(), pattern.end(), kSlotToken);
    const std::vector<std::string> before(pattern.begin(), slot);
    const std::vector<std::string> after(slot + 1, pattern.end());
    const StateId pre =
        AddChain(fst, start, CarrierLabels(before, level, *symbols, wpm));
    const StateId enter = fst.AddState();
    fst.AddArc(pre, kEpsilon, open, Weight::One(), enter);
    const StateId inside = fst.AddState();
    if (level == TaggerLevel::kWord) {
      fst.AddArc(enter, kSigma, kSigma, Weight::One(), inside);
    } else {
      for (Label l : word_starts) fst.AddArc(enter, l, l, Weight::One(), inside);
    }
    fst.AddArc(inside, kSigma, kSigma, Weight::One(), inside);
    const StateId leave = fst.AddState();
    fst.AddArc(inside, kEpsilon, close, Weight::One(), leave);
    if (after.empty()) {
      fst.SetFinal(leave);
      continue;
    }
    const StateId end =
        AddChain(fst, leave, CarrierLabels(after, level, *symbols, wpm));
    fst.SetFinal(end);
    fst.AddArc(end, kSigma, kSigma, Weight::One(), end);
  }
  return fst;
}

std::vector<TaggedSpan> ExtractTaggedSpans(const Fst& y, Label open_tag,
                                           Label close_tag) {
  std::vector<TaggedSpan> spans;
  if (y.Empty()) return spans;
  const StateId n = y.NumStates();
  auto is_tag = [&](const Arc& a) {
    return a.olabel == open_tag || a.olabel == close_tag;
  };
  std::vector<std::vector<std::pair<StateId, size_t>>> incoming(n);
  for (StateId s = 0; s < n; ++s) {
    const auto arcs = y.Arcs(s);
    for (size_t i = 0; i < arcs.size(); ++i) {
      incoming[arcs[i].nextstate].push_back({s, i});
    }
  }
  std::vector<char> close_seen(n, 0);
  for (StateId s = 0; s < n; ++s) {
    for (const Arc& open : y.Arcs(s)) {
      if (open.olabel != open_tag) continue;
      // States reachable from the opening tag without crossing a tag.
      std::vector<char> fwd(n, 0);
      std::deque<StateId> queue = {open.nextstate};
      fwd[open.nextstate] = 1;
      std::vector<std::pair<StateId, const Arc*>> closes;
      while (!queue.empty()) {
        const StateId u = queue.front();
        queue.pop_front();
        for (const Arc& a : y.Arcs(u)) {
          if (a.olabel == open_tag) {
            throw InternalError("nested opening tag in tagged lattice");
          }
          if (a.olabel == close_tag) {
            closes.push_back({u, &a});
            continue;
          }
          if (!fwd[a.nextstate]) {
            fwd[a.nextstate] = 1;
            queue.push_back(a.nextstate);
          }
        }
      }
      if (closes.empty()) {
        throw InternalError("opening tag without a closing tag");
      }
      for (const auto& [from, close] : closes) {
        close_seen[from] = 1;
        std::vector<char> keep(n, 0);
        keep[from] = 1;
        std::deque<StateId> back = {from};
        while (!back.empty()) {
          const StateId u = back.front();
          back.pop_front();
          for (const auto& [p, i] : incoming[u]) {
            if (!fwd[p] || keep[p] || is_tag(y.Arcs(p)[i])) continue;
            keep[p] = 1;
            back.push_back(p);
          }
        }
        TaggedSpan span;
        span.lattice = Fst(y.InputSymbols(), y.InputSymbols());
        std::vector<StateId> map(n, kNoState);
        for (StateId u = 0; u < n; ++u) {
          if (keep[u]) map[u] = span.lattice.AddState();
        }
        for (StateId u = 0; u < n; ++u) {
          if (!keep[u]) continue;
          for (const Arc& a : y.Arcs(u)) {
            if (is_tag(a) || !keep[a.nextstate]) continue;
            span.lattice.AddArc(map[u], a.ilabel, a.ilabel, a.weight,
                                map[a.nextstate]);
          }
        }
        span.lattice.SetStart(map[open.nextstate]);
        span.lattice.SetFinal(map[from]);
        span.open_from = s;
        span.open_weight = open.weight;
        span.close_to = close->nextstate;
        span.close_weight = close->weight;
        spans.push_back(std::move(span));
      }
    }
  }
  for (StateId s = 0; s < n; ++s) {
    for (const Arc& a : y.Arcs(s)) {
      if (a.olabel == close_tag && !close_seen[s]) {
        throw InternalError("closing tag without an opening tag");
      }
    }
  }
  return spans;
}

Fst ExtractTaggedSpan(const Fst& y, Label open_tag, Label close_tag) {
  std::vector<Fst> parts;
  for (auto& span : ExtractTaggedSpans(y, open_tag, close_tag)) {
    parts.push_back(std::move(span.lattice));
  }
  if (parts.empty()) return Fst(y.InputSymbols(), y.InputSymbols());
  return Union(parts);
}

Weight ContextCost(const TaggedSpan& span, const std::vector<Weight>& forward,
                   const std::vector<Weight>& backward) {
  return Times(Times(forward[span.open_from], span.open_weight),
               Times(span.close_weight, backward[span.close_to]));
}

}  // namespace ctcrewrite
