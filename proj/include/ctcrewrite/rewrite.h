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

#ifndef CTCREWRITE_REWRITE_H_
#define CTCREWRITE_REWRITE_H_

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ctcrewrite/fst.h"
#include "ctcrewrite/g2p.h"
#include "ctcrewrite/phonetics.h"

namespace ctcrewrite {

// Carrier patterns sharing one nonterminal class; "$" marks the slot.
struct Grammar {
  std::string class_name;
  std::vector<std::vector<std::string>> patterns;

  std::string OpenTag() const { return "<" + class_name + ">"; }
  std::string CloseTag() const { return "</" + class_name + ">"; }

  // {"class": "contact", "patterns": [["call", "$"], ...]}. Throws
  // DataError unless every pattern has exactly one slot and at least one
  // carrier token.
  static Grammar FromJson(const std::string& text);
  static Grammar ReadFile(const std::string& path);
  std::string ToJson() const;
};

inline constexpr std::string_view kSlotToken = "$";

enum class TaggerLevel { kWord, kWordpiece };

// Context sigma loop at the start; carrier tokens matched exactly (split
// into wordpieces by `wpm` at wordpiece level); the slot takes one or more
// tokens between inserted eps:<class> and eps:</class> arcs. At wordpiece
// level the slot's first token must start a word. A pattern that ends in
// its slot runs to the end of the input; otherwise a sigma loop follows
// the last carrier token. `symbols` must hold both tags. Throws
// ConfigError for carrier tokens missing from `symbols`.
Fst CompileTagger(const Grammar& grammar, TaggerLevel level,
                  SymbolTablePtr symbols, const WordpieceModel* wpm = nullptr);

// One tagged span of a tagged lattice y: the sublattice strictly between an
// opening tag arc and a closing tag arc.
struct TaggedSpan {
  Fst lattice;  // acceptor over the inner labels, weights preserved
  StateId open_from = kNoState;   // source of the opening tag arc
  StateId close_to = kNoState;    // target of the closing tag arc
  Weight open_weight;
  Weight close_weight;
};

// Every (opening, closing) tag pair connected without crossing tags.
// Throws InternalError for unbalanced or nested tags.
std::vector<TaggedSpan> ExtractTaggedSpans(const Fst& y, Label open_tag,
                                           Label close_tag);
// Union of all span sublattices; empty FST when y has no tags.
Fst ExtractTaggedSpan(const Fst& y, Label open_tag, Label close_tag);

// Cost of reaching the span plus the cost of finishing from it, given the
// forward and backward distances of y in some semiring.
Weight ContextCost(const TaggedSpan& span, const std::vector<Weight>& forward,
                   const std::vector<Weight>& backward);

struct RewriteCandidate {
  std::string entity;
  double cost = 0.0;
  int span = 0;
};

// Phoneme-to-entity transducer for a set of entities.
struct EntityContext {
  Fst s_prime;                      // phonemes -> entity words
  std::vector<std::string> entities;  // canonical names kept
  std::vector<std::string> unmappable;
  std::map<std::vector<Label>, std::string> by_words;
  bool Empty() const { return entities.empty(); }
};

std::string NormalizeText(std::string_view text);

// s' = inv(G) o s for the entities' word sequences. Entities with a word
// outside the lexicon are reported in `unmappable`. Throws DataError when
// entities are given but none is mappable.
EntityContext BuildEntityFst(const std::vector<std::string>& entities,
                             const Fst& g2p, SymbolTablePtr word_syms);

// h = det(rmeps(proj_out(z o_rho s'))) under `semiring`, one candidate per
// surviving entity, ranked by cost then name.
std::vector<RewriteCandidate> Retrieve(const Fst& z, const EntityContext& ctx,
                                       Semiring semiring);
// Same, from an already composed z o_rho s'.
std::vector<RewriteCandidate> CandidatesFromComposition(
    const Fst& composed, const EntityContext& ctx, Semiring semiring);

// Log-determinized cost of the z paths consistent with `h0_prime`, a
// phoneme acceptor for the 1-best span (only its input side is matched).
// nullopt when no path
// survives.
std::optional<double> ComparisonScore(const Fst& z, const Fst& h0_prime);

struct SpanDecision {
  std::vector<RewriteCandidate> candidates;  // ranked
  std::optional<double> comparison_cost;
  bool rewrite = false;
};

// Rewrite iff a candidate exists and best.cost + margin < comparison cost
// (an absent comparison cost counts as +inf).
SpanDecision Decide(std::vector<RewriteCandidate> candidates,
                    std::optional<double> comparison_cost, double margin);

enum class Method {
  kNbest1,
  kNbest1000,
  kRandomPaths,
  kWp,
  kWpLogDet,
  kWpLogDetCompSc,
};
std::string MethodName(Method method);
Method ParseMethod(std::string_view name);
bool IsWordpieceMethod(Method method);
const std::vector<Method>& AllMethods();

struct EngineOptions {
  double unit_cost = 3.0;
  int max_edits = 2;
  double tau = 1.0;
  double lambda = 1.0;
  double skip_penalty = 6.0;
  double margin = 0.0;
  // Phoneme expansion in the wordpiece pipeline (the word pipeline always
  // expands).
  bool wordpiece_expansion = false;
  size_t random_paths = 1000;
  uint64_t random_seed = 17;
};

struct EngineResources {
  PhonemeInventory inventory;
  WordpieceModel wpm;
  std::vector<LexiconEntry> lexicon;
  AlignmentTable alignments;
  Grammar grammar;
};

struct SpanRecord {
  std::string onebest;  // glued 1-best of the span
  SpanDecision decision;
  std::string rewritten;  // transcript if this span's rewrite were applied
};

struct RewriteDecision {
  std::string method;
  std::string original;    // glued lattice 1-best
  std::vector<SpanRecord> spans;
  int chosen_span = -1;
  std::string entity;
  std::string transcript;

  bool Rewritten() const { return chosen_span >= 0; }
  // Top `max_candidates` per span; infinities print as null.
  std::string ToJson(size_t max_candidates = 10) const;
};

// Glues wordpieces, treating a leading non-initial piece as starting a
// word.
std::string GlueLenient(const std::vector<std::string>& pieces);

class RewriteEngine {
 public:
  RewriteEngine(EngineResources resources, EngineOptions options);

  const EngineOptions& Options() const { return options_; }
  const EngineResources& Resources() const { return res_; }
  const SymbolTablePtr& PieceSymbols() const { return piece_syms_; }
  const SymbolTablePtr& WordSymbols() const { return word_syms_; }
  const SymbolTablePtr& PhonemeSymbols() const { return res_.inventory.Symbols(); }
  const Fst& WordpieceTagger() const { return tagger_wp_; }
  const Fst& WordTagger() const { return tagger_word_; }
  const Fst& W() const { return w_; }
  const Fst& G() const { return g_; }
  const Fst& P() const { return p_; }
  const Fst& E() const { return e_; }

  EntityContext CompileContext(const std::vector<std::string>& entities) const;

  // Context-independent work for one lattice: tagging, span phoneme
  // lattices, context costs in both semirings and the 1-best comparison
  // cost. Reusable across contexts.
  struct Analysis;
  // Shared by the three wordpiece methods.
  Analysis AnalyzeWordpieces(const Fst& lattice) const;
  // Word-level baseline for kNbest1, kNbest1000 or kRandomPaths.
  Analysis AnalyzeWords(const Fst& lattice, Method method) const;
  // One decision per method; methods must match the analysis level. The
  // span/context composition is shared between methods.
  std::vector<RewriteDecision> Decide(const Analysis& analysis,
                                      const EntityContext& ctx,
                                      const std::vector<Method>& methods) const;
  RewriteDecision Rewrite(const Fst& lattice, const EntityContext& ctx,
                          Method method) const;

  // z for a wordpiece span sublattice: proj_out((x' o W) o_sigma E).
  Fst ExpandWordpieces(const Fst& span) const;
  // z for a word span sublattice: proj_out(((y o G) o P) o_sigma E).
  Fst ExpandWords(const Fst& span) const;
  // Phoneme acceptor for a 1-best piece sequence: words found in the
  // lexicon take their pronunciations from G, other words concatenate the
  // top alignment mapping of each piece.
  Fst OnebestToPhonemes(const std::vector<Label>& pieces) const;

 private:
  EngineResources res_;
  EngineOptions options_;
  SymbolTablePtr piece_syms_;
  SymbolTablePtr word_syms_;
  Label piece_open_, piece_close_, word_open_, word_close_;
  Fst tagger_wp_, tagger_word_, w_, g_, p_, e_;
};

struct RewriteEngine::Analysis {
  bool word_level = false;
  std::string original;
  struct Span {
    std::vector<std::string> prefix;  // tokens before the span
    std::vector<std::string> suffix;  // tokens after it
    std::string onebest;
    Fst z;
    double context_tropical = 0.0;
    double context_log = 0.0;
    // Log comparison cost including context (wordpiece level only); absent
    // when no z path is consistent with the 1-best.
    std::optional<double> comparison;
    // The 1-best span has no phoneme reading; comparison scoring keeps it.
    bool comparison_unmappable = false;
  };
  std::vector<Span> spans;
};

}  // namespace ctcrewrite

#endif  // CTCREWRITE_REWRITE_H_
