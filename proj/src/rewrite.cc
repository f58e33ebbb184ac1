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

#include "ctcrewrite/rewrite.h"

#include <algorithm>
#include <cctype>
#include <json.hpp>
#include <sstream>

#include "ctcrewrite/errors.h"
#include "ctcrewrite/fst_ops.h"
#include "ctcrewrite/lattice.h"

namespace ctcrewrite {

using nlohmann::json;

namespace {

std::vector<std::string> SplitWords(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream in{std::string(text)};
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

std::string JoinWords(const std::vector<std::string>& words) {
  std::string out;
  for (const auto& w : words) {
    if (w.empty()) continue;
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

std::vector<std::string> Names(const SymbolTable& syms,
                               const std::vector<Label>& labels) {
  std::vector<std::string> out;
  for (Label l : labels) {
    if (l != kEpsilon) out.push_back(syms.Symbol(l));
  }
  return out;
}

// Input labels of the cheapest path from `from` to `to` (or to a final
// state, adding its final weight, when `to` is kNoState).
std::vector<Label> BestLabels(const Fst& fst, const std::vector<StateId>& order,
                              StateId from, StateId to) {
  const StateId n = fst.NumStates();
  std::vector<double> dist(n, INFINITY);
  std::vector<std::pair<StateId, Label>> back(n, {kNoState, kEpsilon});
  dist[from] = 0.0;
  for (StateId s : order) {
    if (std::isinf(dist[s])) continue;
    for (const Arc& a : fst.Arcs(s)) {
      const double d = dist[s] + a.weight.Value();
      if (d < dist[a.nextstate]) {
        dist[a.nextstate] = d;
        back[a.nextstate] = {s, a.ilabel};
      }
    }
  }
  StateId end = to;
  if (end == kNoState) {
    double best = INFINITY;
    for (StateId s : order) {
      const double d = dist[s] + fst.Final(s).Value();
      if (d < best) {
        best = d;
        end = s;
      }
    }
  }
  std::vector<Label> labels;
  if (end == kNoState || std::isinf(dist[end])) return labels;
  for (StateId s = end; s != from; s = back[s].first) {
    if (back[s].second != kEpsilon) labels.push_back(back[s].second);
  }
  std::reverse(labels.begin(), labels.end());
  return labels;
}

// Minimum cost of accepting `labels` in `fst` (epsilon-free input).
double PathCost(const Fst& fst, const std::vector<Label>& labels) {
  std::map<StateId, double> frontier = {{fst.Start(), 0.0}};
  for (Label l : labels) {
    std::map<StateId, double> next;
    for (const auto& [s, c] : frontier) {
      for (const Arc& a : fst.Arcs(s)) {
        if (a.ilabel != l) continue;
        auto [it, fresh] = next.emplace(a.nextstate, c + a.weight.Value());
        if (!fresh) it->second = std::min(it->second, c + a.weight.Value());
      }
    }
    frontier = std::move(next);
  }
  double best = INFINITY;
  for (const auto& [s, c] : frontier) {
    best = std::min(best, c + fst.Final(s).Value());
  }
  return best;
}

json CostJson(std::optional<double> cost) {
  if (!cost || !std::isfinite(*cost)) return nullptr;
  return *cost;
}

}  // namespace

std::string NormalizeText(std::string_view text) {
  std::string out;
  bool space = false;
  for (unsigned char c : text) {
    if (std::isspace(c)) {
      space = !out.empty();
      continue;
    }
    if (c < 128 && !std::isalnum(c)) continue;
    if (space) out += ' ';
    space = false;
    out += static_cast<char>(c < 128 ? std::tolower(c) : c);
  }
  return out;
}

std::string GlueLenient(const std::vector<std::string>& pieces) {
  if (pieces.empty()) return "";
  if (StartsWord(pieces.front())) return GlueWordpieces(pieces);
  std::vector<std::string> fixed = pieces;
  fixed.front() = std::string(kWordStart) + fixed.front();
  return GlueWordpieces(fixed);
}

EntityContext BuildEntityFst(const std::vector<std::string>& entities,
                             const Fst& g2p, SymbolTablePtr word_syms) {
  EntityContext ctx;
  Fst s(word_syms, word_syms);
  const StateId root = s.AddState();
  s.SetStart(root);
  for (const auto& entity : entities) {
    const auto words = SplitWords(NormalizeText(entity));
    std::vector<Label> labels;
    bool ok = !words.empty();
    for (const auto& w : words) {
      const auto l = word_syms->Find(w);
      if (!l || w.front() == '<') {
        ok = false;
        break;
      }
      labels.push_back(*l);
    }
    if (!ok) {
      ctx.unmappable.push_back(entity);
      continue;
    }
    if (!ctx.by_words.emplace(labels, entity).second) continue;
    ctx.entities.push_back(entity);
    // Trie insertion keeps s deterministic.
    StateId cur = root;
    for (Label l : labels) {
      StateId next = kNoState;
      for (const Arc& a : s.Arcs(cur)) {
        if (a.ilabel == l) next = a.nextstate;
      }
      if (next == kNoState) {
        next = s.AddState();
        s.AddArc(cur, l, l, Weight::One(), next);
      }
      cur = next;
    }
    s.SetFinal(cur);
  }
  if (!entities.empty() && ctx.entities.empty()) {
    throw DataError("no context entity can be mapped to phonemes");
  }
  if (ctx.entities.empty()) {
    ctx.s_prime = Fst(g2p.OutputSymbols(), word_syms);
    return ctx;
  }
  ctx.s_prime = Compose(Invert(g2p), s);
  return ctx;
}

std::vector<RewriteCandidate> CandidatesFromComposition(
    const Fst& composed, const EntityContext& ctx, Semiring semiring) {
  std::vector<RewriteCandidate> out;
  if (composed.Empty()) return out;
  const Fst h =
      Determinize(RmEpsilon(ProjectOutput(composed), semiring), semiring);
  for (const auto& p : EnumeratePaths(h)) {
    auto it = ctx.by_words.find(p.ilabels);
    if (it == ctx.by_words.end()) {
      throw InternalError("retrieved word sequence is not a context entity");
    }
    out.push_back({it->second, p.cost, 0});
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.cost != b.cost) return a.cost < b.cost;
    return a.entity < b.entity;
  });
  return out;
}

std::vector<RewriteCandidate> Retrieve(const Fst& z, const EntityContext& ctx,
                                       Semiring semiring) {
  if (ctx.Empty() || z.Empty()) return {};
  return CandidatesFromComposition(
      Compose(z, ctx.s_prime, ComposeMode::kRhoLeft), ctx, semiring);
}

std::optional<double> ComparisonScore(const Fst& z, const Fst& h0_prime) {
  if (z.Empty() || h0_prime.Empty()) return std::nullopt;
  const Fst composed = Compose(z, h0_prime, ComposeMode::kRhoLeft);
  if (composed.Empty()) return std::nullopt;
  const Fst h = Determinize(RmEpsilon(ProjectOutput(composed), Semiring::kLog),
                            Semiring::kLog);
  const Weight d = ShortestDistance(h, Semiring::kLog);
  if (d.IsZero()) return std::nullopt;
  return d.Value();
}

SpanDecision Decide(std::vector<RewriteCandidate> candidates,
                    std::optional<double> comparison_cost, double margin) {
  SpanDecision d;
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const auto& a, const auto& b) {
                     if (a.cost != b.cost) return a.cost < b.cost;
                     return a.entity < b.entity;
                   });
  d.candidates = std::move(candidates);
  d.comparison_cost = comparison_cost;
  if (d.candidates.empty()) return d;
  const double bar = comparison_cost ? *comparison_cost : INFINITY;
  // Scores of the same string reached by different compositions can differ
  // in the last bits; treat those as ties.
  constexpr double kTieTolerance = 1e-9;
  d.rewrite = d.candidates.front().cost + margin < bar - kTieTolerance;
  return d;
}

std::string MethodName(Method method) {
  switch (method) {
    case Method::kNbest1: return "nbest-1";
    case Method::kNbest1000: return "nbest-1000";
    case Method::kRandomPaths: return "random-n";
    case Method::kWp: return "wp";
    case Method::kWpLogDet: return "wp+logdet";
    case Method::kWpLogDetCompSc: return "wp+logdet+compsc";
  }
  throw InternalError("unknown method");
}

Method ParseMethod(std::string_view name) {
  for (Method m : AllMethods()) {
    if (MethodName(m) == name) return m;
  }
  throw ConfigError("unknown method: " + std::string(name));
}

bool IsWordpieceMethod(Method method) {
  return method == Method::kWp || method == Method::kWpLogDet ||
         method == Method::kWpLogDetCompSc;
}

const std::vector<Method>& AllMethods() {
  static const std::vector<Method> all = {
      Method::kNbest1, Method::kNbest1000,       Method::kRandomPaths,
      Method::kWp,     Method::kWpLogDet, Method::kWpLogDetCompSc};
  return all;
}

std::string RewriteDecision::ToJson(size_t max_candidates) const {
  json spans_json = json::array();
  for (const auto& s : spans) {
    json cands = json::array();
    for (size_t i = 0; i < s.decision.candidates.size() && i < max_candidates;
         ++i) {
      cands.push_back({{"entity", s.decision.candidates[i].entity},
                       {"cost", CostJson(s.decision.candidates[i].cost)}});
    }
    spans_json.push_back({{"onebest", s.onebest},
                          {"candidates", cands},
                          {"comparison_cost", CostJson(s.decision.comparison_cost)},
                          {"rewrite", s.decision.rewrite}});
  }
  json doc = {{"method", method},
              {"original", original},
              {"spans", spans_json},
              {"verdict", Rewritten() ? "rewrite" : "keep"},
              {"entity", Rewritten() ? json(entity) : json(nullptr)},
              {"transcript", transcript}};
  return doc.dump();
}

RewriteEngine::RewriteEngine(EngineResources resources, EngineOptions options)
    : res_(std::move(resources)), options_(options) {
  if (options_.margin < 0 || std::isnan(options_.margin)) {
    throw ConfigError("margin must be >= 0");
  }
  auto pieces = std::make_shared<SymbolTable>();
  for (const auto& p : res_.wpm.Pieces()) pieces->AddSymbol(p);
  piece_open_ = pieces->AddSymbol(res_.grammar.OpenTag());
  piece_close_ = pieces->AddSymbol(res_.grammar.CloseTag());
  piece_syms_ = pieces;
  auto words = std::make_shared<SymbolTable>();
  for (const auto& e : res_.lexicon) words->AddSymbol(e.word);
  word_open_ = words->AddSymbol(res_.grammar.OpenTag());
  word_close_ = words->AddSymbol(res_.grammar.CloseTag());
  word_syms_ = words;
  const SymbolTablePtr& phones = res_.inventory.Symbols();
  tagger_wp_ = CompileTagger(res_.grammar, TaggerLevel::kWordpiece,
                             piece_syms_, &res_.wpm);
  tagger_word_ = CompileTagger(res_.grammar, TaggerLevel::kWord, word_syms_);
  w_ = BuildWFst(res_.alignments, res_.wpm, piece_syms_, phones,
                 options_.skip_penalty);
  g_ = BuildG2pFst(res_.lexicon, word_syms_, phones);
  p_ = BuildPhonemeExpander(res_.inventory, options_.tau, options_.lambda);
  e_ = BuildEditFst(options_.max_edits, options_.unit_cost, phones);
}

EntityContext RewriteEngine::CompileContext(
    const std::vector<std::string>& entities) const {
  return BuildEntityFst(entities, g_, word_syms_);
}

Fst RewriteEngine::ExpandWordpieces(const Fst& span) const {
  Fst xw = Compose(span, w_);
  if (options_.wordpiece_expansion) xw = Compose(xw, p_);
  return ProjectOutput(Compose(xw, e_, ComposeMode::kSigmaRight));
}

Fst RewriteEngine::ExpandWords(const Fst& span) const {
  const Fst yg = Compose(span, g_);
  const Fst ygp = Compose(yg, p_, ComposeMode::kSigmaRight);
  return ProjectOutput(Compose(ygp, e_, ComposeMode::kSigmaRight));
}

Fst RewriteEngine::OnebestToPhonemes(const std::vector<Label>& pieces) const {
  // Split at word starts; lexicon words read through G, the rest through
  // each piece's top mapping.
  std::vector<std::vector<Label>> words;
  for (Label l : pieces) {
    if (words.empty() || StartsWord(piece_syms_->Symbol(l))) words.emplace_back();
    words.back().push_back(l);
  }
  Fst out(p_.InputSymbols(), p_.InputSymbols());
  StateId tail = out.AddState();
  out.SetStart(tail);
  for (const auto& group : words) {
    std::vector<std::string> names;
    for (Label l : group) names.push_back(piece_syms_->Symbol(l));
    const std::string word = GlueLenient(names);
    const auto id = word_syms_->Find(word);
    Fst part;
    if (id && word.front() != '<') {
      part = ProjectOutput(Compose(
          LinearAcceptor(std::vector<Label>{*id}, Weight::One(), word_syms_),
          g_));
    } else {
      // One reading per piece: its most frequent mapping.
      std::vector<Label> phones;
      for (const auto& name : names) {
        const auto maps = res_.alignments.MappingsFor(name);
        if (maps.empty()) continue;
        for (const auto& ph : maps.front()->phonemes) {
          phones.push_back(res_.inventory.Symbols()->FindOrThrow(ph));
        }
      }
      if (phones.empty()) return Fst();
      part = LinearAcceptor(phones, Weight::One(), res_.inventory.Symbols());
    }
    if (part.Empty()) return Fst();
    // Append `part` after `tail` through an epsilon arc.
    const StateId offset = out.NumStates();
    for (StateId s = 0; s < part.NumStates(); ++s) out.AddState();
    out.AddArc(tail, kEpsilon, kEpsilon, Weight::One(), offset + part.Start());
    const StateId end = out.AddState();
    for (StateId s = 0; s < part.NumStates(); ++s) {
      for (const Arc& a : part.Arcs(s)) {
        out.AddArc(offset + s, a.ilabel, a.olabel, a.weight,
                   offset + a.nextstate);
      }
      if (part.IsFinal(s)) {
        out.AddArc(offset + s, kEpsilon, kEpsilon, part.Final(s), end);
      }
    }
    tail = end;
  }
  out.SetFinal(tail, Weight::One());
  return out;
}

namespace {

void FillContext(const TaggedSpan& span, const Fst& y,
                 const std::vector<StateId>& order,
                 const std::vector<Weight>& fwd_t,
                 const std::vector<Weight>& bwd_t,
                 const std::vector<Weight>& fwd_l,
                 const std::vector<Weight>& bwd_l,
                 RewriteEngine::Analysis::Span& out) {
  const SymbolTable& syms = *y.InputSymbols();
  out.prefix = Names(syms, BestLabels(y, order, y.Start(), span.open_from));
  out.suffix = Names(syms, BestLabels(y, order, span.close_to, kNoState));
  out.context_tropical = ContextCost(span, fwd_t, bwd_t).Value();
  out.context_log = ContextCost(span, fwd_l, bwd_l).Value();
}

}  // namespace

RewriteEngine::Analysis RewriteEngine::AnalyzeWordpieces(
    const Fst& lattice) const {
  Analysis a;
  const auto best = ShortestPaths(lattice, 1);
  if (best.empty()) throw DataError("lattice accepts nothing");
  a.original = GlueLenient(Names(*piece_syms_, best[0].ilabels));
  const Fst y = Compose(lattice, tagger_wp_, ComposeMode::kSigmaRight);
  auto spans = ExtractTaggedSpans(y, piece_open_, piece_close_);
  if (spans.empty()) return a;
  const auto order = TopologicalOrder(y);
  const auto fwd_t = ForwardDistances(y, Semiring::kTropical);
  const auto bwd_t = BackwardDistances(y, Semiring::kTropical);
  const auto fwd_l = ForwardDistances(y, Semiring::kLog);
  const auto bwd_l = BackwardDistances(y, Semiring::kLog);
  for (const auto& span : spans) {
    Analysis::Span s;
    FillContext(span, y, order, fwd_t, bwd_t, fwd_l, bwd_l, s);
    const auto h0 = ShortestPaths(span.lattice, 1);
    if (h0.empty()) continue;
    s.onebest = GlueLenient(Names(*piece_syms_, h0[0].ilabels));
    s.z = ExpandWordpieces(span.lattice);
    const Fst h0_prime = OnebestToPhonemes(h0[0].ilabels);
    if (h0_prime.Empty()) {
      s.comparison_unmappable = true;
    } else if (const auto cmp = ComparisonScore(s.z, h0_prime)) {
      s.comparison = *cmp + s.context_log;
    }
    a.spans.push_back(std::move(s));
  }
  return a;
}

RewriteEngine::Analysis RewriteEngine::AnalyzeWords(const Fst& lattice,
                                                    Method method) const {
  Analysis a;
  a.word_level = true;
  const auto best = ShortestPaths(lattice, 1);
  if (best.empty()) throw DataError("lattice accepts nothing");
  a.original = GlueLenient(Names(*piece_syms_, best[0].ilabels));
  std::vector<std::vector<Label>> paths;
  std::vector<double> costs;
  switch (method) {
    case Method::kNbest1:
    case Method::kNbest1000:
      for (const auto& p :
           ShortestPaths(lattice, method == Method::kNbest1 ? 1 : 1000)) {
        paths.push_back(p.ilabels);
        costs.push_back(p.cost);
      }
      break;
    case Method::kRandomPaths:
      paths = SampleRandomPaths(lattice, options_.random_paths,
                                options_.random_seed);
      for (const auto& p : paths) costs.push_back(PathCost(lattice, p));
      break;
    default:
      throw ConfigError("not a word-level method: " + MethodName(method));
  }
  // Glue into words; paths with a word outside the lexicon are dropped.
  std::vector<std::vector<std::string>> word_paths;
  std::vector<double> word_costs;
  for (size_t i = 0; i < paths.size(); ++i) {
    auto words = SplitWords(GlueLenient(Names(*piece_syms_, paths[i])));
    bool valid = !words.empty();
    for (const auto& w : words) {
      valid = valid && word_syms_->Contains(w) && w.front() != '<';
    }
    if (!valid) continue;
    word_paths.push_back(std::move(words));
    word_costs.push_back(costs[i]);
  }
  if (word_paths.empty()) return a;
  const Fst words = Determinize(
      WordsToLattice(word_paths, word_costs, word_syms_), Semiring::kTropical);
  const Fst y = Compose(words, tagger_word_, ComposeMode::kSigmaRight);
  auto spans = ExtractTaggedSpans(y, word_open_, word_close_);
  if (spans.empty()) return a;
  const auto order = TopologicalOrder(y);
  const auto fwd_t = ForwardDistances(y, Semiring::kTropical);
  const auto bwd_t = BackwardDistances(y, Semiring::kTropical);
  const auto fwd_l = ForwardDistances(y, Semiring::kLog);
  const auto bwd_l = BackwardDistances(y, Semiring::kLog);
  for (const auto& span : spans) {
    Analysis::Span s;
    FillContext(span, y, order, fwd_t, bwd_t, fwd_l, bwd_l, s);
    const auto h0 = ShortestPaths(span.lattice, 1);
    if (h0.empty()) continue;
    s.onebest = JoinWords(Names(*word_syms_, h0[0].ilabels));
    s.z = ExpandWords(span.lattice);
    a.spans.push_back(std::move(s));
  }
  return a;
}

std::vector<RewriteDecision> RewriteEngine::Decide(
    const Analysis& analysis, const EntityContext& ctx,
    const std::vector<Method>& methods) const {
  std::vector<RewriteDecision> out(methods.size());
  for (size_t m = 0; m < methods.size(); ++m) {
    if (IsWordpieceMethod(methods[m]) == analysis.word_level) {
      throw ConfigError("method " + MethodName(methods[m]) +
                        " does not match the analysis level");
    }
    out[m].method = MethodName(methods[m]);
    out[m].original = analysis.original;
    out[m].transcript = analysis.original;
  }
  for (size_t i = 0; i < analysis.spans.size(); ++i) {
    const auto& span = analysis.spans[i];
    std::optional<Fst> composed;
    std::optional<std::vector<RewriteCandidate>> trop, log;
    auto candidates = [&](Semiring sr) -> const std::vector<RewriteCandidate>& {
      auto& slot = sr == Semiring::kTropical ? trop : log;
      if (!slot) {
        if (!composed) {
          composed = ctx.Empty() || span.z.Empty()
                         ? Fst()
                         : Compose(span.z, ctx.s_prime, ComposeMode::kRhoLeft);
        }
        slot = CandidatesFromComposition(*composed, ctx, sr);
      }
      return *slot;
    };
    for (size_t m = 0; m < methods.size(); ++m) {
      const Method method = methods[m];
      const bool use_log = method == Method::kWpLogDet ||
                           method == Method::kWpLogDetCompSc;
      const double context = use_log ? span.context_log : span.context_tropical;
      std::vector<RewriteCandidate> cands =
          candidates(use_log ? Semiring::kLog : Semiring::kTropical);
      for (auto& c : cands) {
        c.cost += context;
        c.span = static_cast<int>(i);
      }
      std::optional<double> cmp;
      if (method == Method::kWpLogDetCompSc) {
        // An unreadable 1-best cannot be compared against; keep it.
        cmp = span.comparison_unmappable ? -INFINITY : span.comparison;
      }
      SpanRecord rec;
      rec.onebest = span.onebest;
      rec.decision = ctcrewrite::Decide(std::move(cands), cmp, options_.margin);
      if (rec.decision.rewrite) {
        const std::string entity = rec.decision.candidates.front().entity;
        const std::string prefix = analysis.word_level
                                       ? JoinWords(span.prefix)
                                       : GlueLenient(span.prefix);
        const std::string suffix = analysis.word_level
                                       ? JoinWords(span.suffix)
                                       : GlueLenient(span.suffix);
        rec.rewritten = JoinWords({prefix, entity, suffix});
      }
      out[m].spans.push_back(std::move(rec));
    }
  }
  for (auto& d : out) {
    double best = INFINITY;
    for (size_t i = 0; i < d.spans.size(); ++i) {
      const auto& sd = d.spans[i].decision;
      if (sd.rewrite && sd.candidates.front().cost < best) {
        best = sd.candidates.front().cost;
        d.chosen_span = static_cast<int>(i);
      }
    }
    if (d.chosen_span >= 0) {
      const auto& rec = d.spans[d.chosen_span];
      d.entity = rec.decision.candidates.front().entity;
      d.transcript = rec.rewritten;
    }
  }
  return out;
}

RewriteDecision RewriteEngine::Rewrite(const Fst& lattice,
                                       const EntityContext& ctx,
                                       Method method) const {
  const Analysis a = IsWordpieceMethod(method) ? AnalyzeWordpieces(lattice)
                                               : AnalyzeWords(lattice, method);
  return Decide(a, ctx, {method}).front();
}

}  // namespace ctcrewrite
