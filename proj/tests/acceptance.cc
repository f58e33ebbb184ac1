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

// End-to-end acceptance checks. Prints one PASS/FAIL line per check and
// exits non-zero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ctcrewrite/errors.h"
#include "ctcrewrite/eval.h"
#include "ctcrewrite/fst_ops.h"
#include "ctcrewrite/g2p.h"
#include "ctcrewrite/lattice.h"
#include "ctcrewrite/phonetics.h"
#include "ctcrewrite/rewrite.h"
#include "oracle.h"

namespace ctcrewrite {
namespace {

const std::string kRoot = CTCREWRITE_SOURCE_DIR;
const std::string W_ = std::string(kWordStart);

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

// Collects failure messages for one check.
struct Check {
  std::vector<std::string> problems;
  void Fail(const std::string& what) {
    if (problems.size() < 5) problems.push_back(what);
    else if (problems.size() == 5) problems.push_back("...");
  }
  bool Ok() const { return problems.empty(); }
};

// Oracle equivalence of the core operations on random acyclic machines.
std::string CheckOracle(Check& c) {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(20260101);
  const int kCases = 1000;
  oracle::RandomFstOptions trans;
  oracle::RandomFstOptions acc;
  acc.acceptor = true;
  acc.epsilon_prob = 0.3;
  for (int i = 0; i < kCases; ++i) {
    const Fst a = oracle::RandomAcyclicFst(rng, trans);
    const Fst b = oracle::RandomAcyclicFst(rng, trans);
    const Fst x = oracle::RandomAcyclicFst(rng, acc);
    const std::string tag = " case " + std::to_string(i);
    const Fst ab = Compose(a, b);
    for (bool log : {false, true}) {
      const Semiring sr = log ? Semiring::kLog : Semiring::kTropical;
      const double tol = log ? 1e-9 : 0.0;
      const char* name = log ? " (log)" : " (tropical)";
      if (!oracle::SameLanguage(oracle::LanguageOf(ab, log),
                                oracle::ComposeLanguage(a, b, log), tol)) {
        c.Fail(std::string("compose") + name + tag);
      }
      const Fst x_noeps = RmEpsilon(x, sr);
      for (StateId s = 0; s < x_noeps.NumStates(); ++s) {
        for (const Arc& arc : x_noeps.Arcs(s)) {
          if (arc.ilabel == kEpsilon) c.Fail(std::string("rmeps left eps") + tag);
        }
      }
      if (!oracle::SameLanguage(oracle::LanguageOf(x_noeps, log),
                                oracle::LanguageOf(x, log), tol) ||
          !oracle::SameLanguage(oracle::LanguageOf(RmEpsilon(a, sr), log),
                                oracle::LanguageOf(a, log), tol)) {
        c.Fail(std::string("rmeps") + name + tag);
      }
      const Fst det = Determinize(x_noeps, sr);
      for (StateId s = 0; s < det.NumStates(); ++s) {
        std::set<Label> seen;
        for (const Arc& arc : det.Arcs(s)) {
          if (!seen.insert(arc.ilabel).second) {
            c.Fail(std::string("determinize not deterministic") + tag);
          }
        }
      }
      if (!oracle::SameLanguage(oracle::AcceptorLanguage(det, log),
                                oracle::AcceptorLanguage(x, log), tol)) {
        c.Fail(std::string("determinize") + name + tag);
      }
      // Projection: acceptor language of each side.
      std::map<oracle::Str, std::vector<double>> ins, outs;
      std::vector<double> all;
      for (const auto& p : oracle::AllPaths(a)) {
        ins[p.in].push_back(p.cost);
        outs[p.out].push_back(p.cost);
        all.push_back(p.cost);
      }
      auto agg = [&](const std::map<oracle::Str, std::vector<double>>& m) {
        std::map<oracle::Str, double> out;
        for (const auto& [k, v] : m) {
          out[k] = log ? oracle::LogSum(v) : oracle::MinCost(v);
        }
        return out;
      };
      if (!oracle::SameLanguage(oracle::AcceptorLanguage(ProjectInput(a), log),
                                agg(ins), tol) ||
          !oracle::SameLanguage(
              oracle::AcceptorLanguage(ProjectOutput(a), log), agg(outs),
              tol)) {
        c.Fail(std::string("project") + name + tag);
      }
      const double want = log ? oracle::LogSum(all) : oracle::MinCost(all);
      const double got = ShortestDistance(a, sr).Value();
      const bool same = std::isinf(want) ? got == want
                                         : std::abs(got - want) <= tol;
      if (!same) c.Fail(std::string("shortest distance") + name + tag);
    }
  }
  const double secs = Seconds(t0);
  if (secs >= 60) c.Fail("runtime " + std::to_string(secs) + " s");
  char buf[96];
  std::snprintf(buf, sizeof buf, "%d cases, %.1f s", kCases, secs);
  return buf;
}

// All strings of length <= max_len over `n` symbols, shortest first.
std::vector<oracle::Str> AllStrings(int n, int max_len) {
  std::vector<oracle::Str> out = {{}};
  for (size_t begin = 0; begin < out.size(); ++begin) {
    if (static_cast<int>(out[begin].size()) == max_len) continue;
    for (int s = 0; s < n; ++s) {
      oracle::Str next = out[begin];
      next.push_back(kFirstUserLabel + s);
      out.push_back(std::move(next));
    }
  }
  return out;
}

// First occurrences of symbols appear in increasing order.
bool Canonical(const oracle::Str& s) {
  Label next = kFirstUserLabel;
  for (Label l : s) {
    if (l > next) return false;
    if (l == next) ++next;
  }
  return true;
}

// Edit transducer against the Levenshtein DP for every pair of strings.
// Edit costs are invariant under renaming the alphabet in both strings and
// so is the transducer (it only uses wildcards), so every left string can
// be replaced by its canonical renaming. Each canonical left string is
// composed with a trie of all right strings at once.
std::string CheckEditDistance(Check& c) {
  const auto t0 = Clock::now();
  constexpr int kSymbols = 5, kMaxLen = 6, kMaxEdits = 3;
  const double unit = 3.0;
  auto syms = std::make_shared<SymbolTable>();
  for (int s = 0; s < kSymbols; ++s) syms->AddSymbol("p" + std::to_string(s));
  const auto strings = AllStrings(kSymbols, kMaxLen);

  // Trie state i accepts strings[i]; AllStrings lists parents first.
  Fst trie(syms, syms);
  std::map<oracle::Str, StateId> node;
  for (const auto& s : strings) {
    const StateId id = trie.AddState();
    node[s] = id;
    trie.SetFinal(id, Weight::One());
    if (s.empty()) {
      trie.SetStart(id);
    } else {
      const oracle::Str parent(s.begin(), s.end() - 1);
      trie.AddArc(node.at(parent), s.back(), s.back(), Weight::One(), id);
    }
  }

  std::vector<Fst> edit;
  for (int k = 0; k <= kMaxEdits; ++k) edit.push_back(BuildEditFst(k, unit, syms));

  size_t canonical = 0, pairs = 0;
  for (const auto& x : strings) {
    if (!Canonical(x)) continue;
    ++canonical;
    const Fst xa = LinearAcceptor(x, Weight::One(), syms);
    for (int k = 0; k <= kMaxEdits; ++k) {
      std::vector<ComposeState> origins;
      const Fst xe = Compose(xa, edit[k], ComposeMode::kSigmaRight);
      const Fst xey = Compose(xe, trie, ComposeMode::kRhoLeft, &origins);
      std::vector<double> cost(strings.size(), INFINITY);
      if (xey.Start() != kNoState) {
        const auto fwd = ForwardDistances(xey, Semiring::kTropical);
        for (StateId s = 0; s < xey.NumStates(); ++s) {
          if (!xey.IsFinal(s)) continue;
          double& slot = cost[origins[s].right];
          slot = std::min(slot, fwd[s].Value() + xey.Final(s).Value());
        }
      }
      for (size_t y = 0; y < strings.size(); ++y) {
        ++pairs;
        const int d = oracle::Levenshtein(x, strings[y]);
        const double want = d <= k ? unit * d : INFINITY;
        if (cost[y] != want) {
          c.Fail("k=" + std::to_string(k) + " pair " + std::to_string(y) +
                 " got " + std::to_string(cost[y]));
        }
      }
    }
  }

  // Direct per-pair composition on random pairs, left strings unrestricted.
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<size_t> pick(0, strings.size() - 1);
  const int kSample = 3000;
  for (int i = 0; i < kSample; ++i) {
    const auto& x = strings[pick(rng)];
    oracle::Str y = strings[pick(rng)];
    if (i % 2 && !x.empty()) {  // near pairs
      y = x;
      y[rng() % y.size()] = kFirstUserLabel + rng() % kSymbols;
      if (i % 4 == 1) y.erase(y.begin());
    }
    const int k = static_cast<int>(rng() % (kMaxEdits + 1));
    const Fst xe = Compose(LinearAcceptor(x, Weight::One(), syms), edit[k],
                           ComposeMode::kSigmaRight);
    const double got =
        ShortestDistance(Compose(xe, LinearAcceptor(y, Weight::One(), syms),
                                 ComposeMode::kRhoLeft),
                         Semiring::kTropical)
            .Value();
    const int d = oracle::Levenshtein(x, y);
    if (got != (d <= k ? unit * d : INFINITY)) c.Fail("direct sample " + std::to_string(i));
  }

  const double secs = Seconds(t0);
  if (secs >= 60) c.Fail("runtime " + std::to_string(secs) + " s");
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "%zu canonical x, %zu strings, %zu (x,y,k) checks, "
                "%d direct pairs, %.1f s",
                canonical, strings.size(), pairs, kSample, secs);
  return buf;
}

// sigma/rho composition against exact composition of expanded operands.
std::string CheckWildcards(Check& c) {
  std::mt19937_64 rng(77);
  const std::vector<Label> alphabet{kFirstUserLabel, kFirstUserLabel + 1,
                                    kFirstUserLabel + 2};
  const Label wild = kFirstUserLabel + 2;
  const int kCases = 200;
  for (int i = 0; i < kCases; ++i) {
    const std::string tag = " case " + std::to_string(i);
    const Fst l = oracle::RandomAcyclicFst(rng);
    Fst r = oracle::RandomAcyclicFst(rng);
    for (StateId s = 0; s < r.NumStates(); ++s) {
      for (Arc& arc : r.MutableArcs(s)) {
        if (arc.ilabel == wild) arc.ilabel = kSigma;
        if (arc.ilabel == kSigma && arc.olabel == wild) arc.olabel = kSigma;
      }
    }
    Fst l2 = oracle::RandomAcyclicFst(rng);
    for (StateId s = 0; s < l2.NumStates(); ++s) {
      for (Arc& arc : l2.MutableArcs(s)) {
        if (arc.olabel == wild) arc.olabel = kRho;
      }
    }
    const Fst r2 = oracle::RandomAcyclicFst(rng);
    for (bool log : {false, true}) {
      const double tol = log ? 1e-9 : 0.0;
      if (!oracle::SameLanguage(
              oracle::LanguageOf(Compose(l, r, ComposeMode::kSigmaRight), log),
              oracle::ComposeLanguage(
                  l, oracle::ExpandWildcard(r, kSigma, true, alphabet), log),
              tol)) {
        c.Fail("sigma" + tag);
      }
      if (!oracle::SameLanguage(
              oracle::LanguageOf(Compose(l2, r2, ComposeMode::kRhoLeft), log),
              oracle::ComposeLanguage(
                  oracle::ExpandWildcard(l2, kRho, false, alphabet), r2, log),
              tol)) {
        c.Fail("rho" + tag);
      }
    }
  }
  return std::to_string(kCases) + " cases per mode";
}

std::vector<Label> Labels(const SymbolTable& syms, const std::string& text) {
  std::istringstream in(text);
  std::vector<Label> out;
  for (std::string t; in >> t;) out.push_back(syms.FindOrThrow(t));
  return out;
}

std::string Text(const SymbolTable& syms, const std::vector<Label>& labels) {
  std::string out;
  for (Label l : labels) out += (out.empty() ? "" : " ") + syms.Symbol(l);
  return out;
}

// A two-slot wordpiece sausage whose truth reading "k A t" is produced by
// two alignments while a wrong reading owns the single cheapest path.
std::string CheckLogDetConsensus(Check& c) {
  const auto inv = PhonemeInventory::ReadFile(kRoot + "/data/phonemes.tsv");
  std::vector<std::string> vocab;
  for (char ch = 'a'; ch <= 'z'; ++ch) {
    vocab.push_back(std::string(1, ch));
    vocab.push_back(W_ + ch);
  }
  for (const char* p : {"\xe2\x96\x81ka", "at"}) vocab.push_back(p);
  const WordpieceModel wpm(vocab);
  std::istringstream table(W_ + "ka\tk A\t10\n" + W_ + "k\tk\t10\n" +
                           "t\tt\t10\n" + "at\tA t\t10\n");
  const auto align = AlignmentTable::Read(table);
  auto piece_syms = std::make_shared<SymbolTable>();
  for (const auto& p : wpm.Pieces()) piece_syms->AddSymbol(p);
  const Fst w = BuildWFst(align, wpm, piece_syms, inv.Symbols(), 50.0);

  // Paths: ka+t 1.9 and k+at 1.9 read "k A t"; ka+at 1.8 reads "k A A t";
  // k+t 2.0 reads "k t".
  const std::vector<Slot> slots = {{{W_ + "ka", 0.9}, {W_ + "k", 1.0}},
                                   {{"at", 0.9}, {"t", 1.0}}};
  const Fst sausage = BuildSausage(slots, piece_syms);
  const Fst z = ProjectOutput(Compose(sausage, w));
  const auto& ph = *inv.Symbols();
  const auto truth = Labels(ph, "k A t");

  const auto lang = oracle::AcceptorLanguage(z, true);
  double best_path = INFINITY;
  for (const auto& p : oracle::AllPaths(z)) best_path = std::min(best_path, p.cost);
  const auto it = lang.find(truth);
  if (it == lang.end()) {
    c.Fail("truth not in lattice");
    return "";
  }
  if (!(it->second < best_path)) c.Fail("fixture: truth mass does not beat the best path");

  const auto raw = ShortestPaths(z, 1);
  const std::string raw_best = raw.empty() ? "" : Text(ph, raw[0].ilabels);
  if (raw_best == "k A t") c.Fail("fixture: raw tropical 1-best is the truth");
  const Fst det =
      Determinize(RmEpsilon(z, Semiring::kLog), Semiring::kLog);
  const auto consensus = ShortestPaths(det, 1);
  const std::string det_best =
      consensus.empty() ? "" : Text(ph, consensus[0].ilabels);
  if (det_best != "k A t") c.Fail("log-det 1-best is '" + det_best + "'");
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "truth mass %.4f < best path %.4f; tropical 1-best '%s', "
                "log-det 1-best '%s'",
                it->second, best_path, raw_best.c_str(), det_best.c_str());
  return buf;
}

std::string CheckEm(Check& c) {
  const std::string fixtures = kRoot + "/tests/fixtures/";
  const auto wpm50 = WordpieceModel::ReadFile(fixtures + "wpm50.vocab");
  const auto lex50 = ReadLexiconFile(fixtures + "lexicon50.tsv", nullptr);
  const auto wpm = WordpieceModel::ReadFile(kRoot + "/data/wpm.vocab");
  const auto lex = ReadLexiconFile(kRoot + "/data/lexicon.tsv", nullptr);
  std::vector<LexiconEntry> sub;
  for (size_t i = 0; i < lex.size(); i += 9) sub.push_back(lex[i]);
  const std::vector<AlignmentPair> tiny = {
      {{W_ + "no"}, {"n", "oU"}, 1.0},
      {{W_ + "go"}, {"g", "oU"}, 2.0},
      {{W_ + "no", "s"}, {"n", "oU", "z"}, 1.0},
      {{W_ + "go", "t"}, {"g", "A", "t"}, 3.0}};
  const std::vector<std::vector<AlignmentPair>> corpora = {
      MakeAlignmentPairs(lex50, wpm50), MakeAlignmentPairs(sub, wpm), tiny};
  for (size_t ci = 0; ci < corpora.size(); ++ci) {
    const auto r = TrainIBM2(corpora[ci], 20);
    for (size_t k = 1; k < r.log_likelihood.size(); ++k) {
      if (r.log_likelihood[k] < r.log_likelihood[k - 1] - 1e-9) {
        c.Fail("corpus " + std::to_string(ci) + " likelihood drops at " +
               std::to_string(k));
      }
    }
  }
  const auto single = TrainIBM2({{{W_ + "a"}, {"eI"}, 1.0}}, 20);
  const double t1 = single.params.T("eI", W_ + "a");
  if (std::abs(t1 - 1.0) > 1e-6) c.Fail("single pair t = " + std::to_string(t1));

  // Alignment table on the 50-word fixture.
  const auto pairs = MakeAlignmentPairs(lex50, wpm50);
  const auto r = TrainIBM2(pairs, 20);
  const auto table = ExtractAlignments(r.params, pairs, 2000);
  size_t spans = 0, contiguous = 0;
  for (const auto& p : pairs) {
    for (const auto& s : ViterbiSpans(r.params, p)) {
      ++spans;
      contiguous += s.contiguous;
    }
  }
  for (const auto& e : table.Entries()) {
    bool found = false;
    for (const auto& p : pairs) {
      if (std::find(p.pieces.begin(), p.pieces.end(), e.piece) == p.pieces.end()) {
        continue;
      }
      for (size_t s = 0; s + e.phonemes.size() <= p.phonemes.size(); ++s) {
        found |= std::equal(e.phonemes.begin(), e.phonemes.end(),
                            p.phonemes.begin() + s);
      }
    }
    if (!found) c.Fail("mapping for " + e.piece + " is not a contiguous span");
  }
  std::set<std::string> trained;
  for (const auto& p : pairs) trained.insert(p.pieces.begin(), p.pieces.end());
  for (const auto& piece : trained) {
    if (!table.Covers(piece)) c.Fail("no mapping for " + piece);
  }
  auto has = [&](const std::string& piece, const std::string& phones) {
    std::istringstream in(phones);
    std::vector<std::string> want;
    for (std::string t; in >> t;) want.push_back(t);
    for (const auto* e : table.MappingsFor(piece)) {
      if (e->phonemes == want) return true;
    }
    return false;
  };
  if (!has(W_ + "please", "p l i z")) c.Fail("missing please -> p l i z");
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "3 corpora x 20 iterations; single pair t = %.9f; %zu table "
                "entries, %zu/%zu Viterbi spans contiguous",
                t1, table.Size(), contiguous, spans);
  return buf;
}

std::string CheckTrend(Check& c, EvalReport* out) {
  const auto t0 = Clock::now();
  const EvalConfig config = LoadEvalConfig(kRoot + "/data/eval_config.json");
  const EvalReport rep = RunEval(config);
  const double secs = Seconds(t0);
  auto col = [&](Method m) {
    const auto it = std::find(config.methods.begin(), config.methods.end(), m);
    if (it == config.methods.end()) throw ConfigError("method missing");
    return static_cast<size_t>(it - config.methods.begin());
  };
  const size_t wp = col(Method::kWp), n1000 = col(Method::kNbest1000),
               n1 = col(Method::kNbest1), logdet = col(Method::kWpLogDet),
               compsc = col(Method::kWpLogDetCompSc);
  std::string detail;
  for (size_t d = 0; d < config.distractors.size(); ++d) {
    const double a = rep.in_ser[wp][d], b = rep.in_ser[n1000][d],
                 e = rep.in_ser[n1][d];
    const double x = rep.anti_ser[compsc][d], y = rep.anti_ser[logdet][d];
    const std::string n = std::to_string(config.distractors[d]);
    if (!(a <= b && b <= e)) c.Fail("in-context ordering at " + n);
    if (!(x <= y)) c.Fail("anti-context ordering at " + n);
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "%s[%s: in wp %.2f <= 1000-best %.2f <= 1-best %.2f; anti "
                  "compsc %.2f <= logdet %.2f]",
                  detail.empty() ? "" : " ", n.c_str(), a, b, e, x, y);
    detail += buf;
  }
  if (secs >= 300) c.Fail("runtime " + std::to_string(secs) + " s");
  char buf[64];
  std::snprintf(buf, sizeof buf, " %.1f s", secs);
  *out = rep;
  return detail + buf;
}

// Phoneme readings of an entity through the lexicon.
std::vector<oracle::Str> Readings(const RewriteEngine& engine,
                                  const std::string& entity) {
  std::vector<Label> words;
  std::istringstream in(NormalizeText(entity));
  for (std::string t; in >> t;) {
    const auto id = engine.WordSymbols()->Find(t);
    if (!id) return {};
    words.push_back(*id);
  }
  const Fst phones = ProjectOutput(Compose(
      LinearAcceptor(words, Weight::One(), engine.WordSymbols()), engine.G()));
  std::set<oracle::Str> out;
  for (const auto& p : EnumeratePaths(phones, 10000)) out.insert(p.ilabels);
  return {out.begin(), out.end()};
}

// Truth pronunciation planted in a noisy phoneme sausage, edit expansion
// applied, 300 distractors at least two edits from every truth reading.
std::string CheckPlanted(Check& c) {
  const EvalConfig config = LoadEvalConfig(kRoot + "/data/eval_config.json");
  const RewriteEngine engine(LoadEngineResources(config), config.engine);
  std::vector<std::string> pool;
  for (const auto& p : LoadPools(config)) {
    pool.insert(pool.end(), p.entities.begin(), p.entities.end());
  }
  std::map<std::string, std::vector<oracle::Str>> readings;
  std::vector<std::string> mappable;
  for (const auto& e : pool) {
    auto r = Readings(engine, e);
    if (r.empty()) continue;
    readings[e] = std::move(r);
    mappable.push_back(e);
  }
  const auto phones = engine.PhonemeSymbols();
  const Label first_phone = kFirstUserLabel;
  const Label last_phone = phones->Size() - 1;
  const Fst edit = BuildEditFst(config.engine.max_edits,
                                config.engine.unit_cost, phones);

  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<double> truth_cost(0.1, 0.7),
      alt_cost(0.8, 2.0), rival_cost(0.05, 0.6);
  std::uniform_int_distribution<Label> any_phone(first_phone, last_phone);
  std::shuffle(mappable.begin(), mappable.end(), rng);

  const int kFixtures = 50;
  const size_t kDistractors = 300;
  int fixtures = 0, wins_trop = 0, wins_log = 0;
  size_t min_eligible = SIZE_MAX;
  for (const auto& truth : mappable) {
    if (fixtures == kFixtures) break;
    const auto& truth_readings = readings.at(truth);
    std::vector<std::string> eligible;
    for (const auto& e : mappable) {
      if (NormalizeText(e) == NormalizeText(truth)) continue;
      int closest = INT32_MAX;
      for (const auto& a : readings.at(e)) {
        for (const auto& b : truth_readings) {
          closest = std::min(closest, oracle::Levenshtein(a, b));
        }
      }
      if (closest >= 2) eligible.push_back(e);
    }
    min_eligible = std::min(min_eligible, eligible.size());
    if (eligible.size() < kDistractors) {
      c.Fail("only " + std::to_string(eligible.size()) +
             " distractors for " + truth);
      continue;
    }
    ++fixtures;
    std::shuffle(eligible.begin(), eligible.end(), rng);
    eligible.resize(kDistractors);
    eligible.push_back(truth);
    const EntityContext ctx = engine.CompileContext(eligible);

    // One slot per truth phoneme with two confusions; in one slot a
    // confusion may beat the truth.
    const auto& planted = truth_readings[rng() % truth_readings.size()];
    const size_t rival_slot = rng() % planted.size();
    Fst sausage(phones, phones);
    StateId cur = sausage.AddState();
    sausage.SetStart(cur);
    for (size_t i = 0; i < planted.size(); ++i) {
      const StateId next = sausage.AddState();
      sausage.AddArc(cur, planted[i], planted[i], Weight(truth_cost(rng)), next);
      for (int a = 0; a < 2; ++a) {
        Label alt = any_phone(rng);
        while (alt == planted[i]) alt = any_phone(rng);
        const double cost = i == rival_slot && a == 0 ? rival_cost(rng)
                                                      : alt_cost(rng);
        sausage.AddArc(cur, alt, alt, Weight(cost), next);
      }
      cur = next;
    }
    sausage.SetFinal(cur, Weight::One());
    const Fst z =
        ProjectOutput(Compose(sausage, edit, ComposeMode::kSigmaRight));
    for (Semiring sr : {Semiring::kTropical, Semiring::kLog}) {
      const auto cands = Retrieve(z, ctx, sr);
      const bool win = !cands.empty() &&
                       NormalizeText(cands[0].entity) == NormalizeText(truth);
      if (win) {
        ++(sr == Semiring::kLog ? wins_log : wins_trop);
      } else {
        c.Fail(std::string(sr == Semiring::kLog ? "log" : "tropical") +
               ": " + truth + " ranked behind " +
               (cands.empty() ? std::string("nothing") : cands[0].entity));
      }
    }
  }
  if (fixtures < kFixtures) c.Fail("only " + std::to_string(fixtures) + " fixtures");
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "%d fixtures, truth first tropical %d/%d, log %d/%d; "
                "smallest eligible pool %zu",
                fixtures, wins_trop, fixtures, wins_log, fixtures, min_eligible);
  return buf;
}

std::string CheckSafety(Check& c, const EvalReport& first) {
  EvalConfig config = LoadEvalConfig(kRoot + "/data/eval_config.json");
  const EvalReport again = RunEval(config);
  if (again.json != first.json) c.Fail("JSON report differs between runs");
  if (again.csv != first.csv) c.Fail("CSV report differs between runs");

  config.engine.margin = INFINITY;
  const EvalReport never = RunEval(config);
  if (never.rewrites != 0) {
    c.Fail("margin=inf rewrote " + std::to_string(never.rewrites));
  }
  for (size_t m = 0; m < config.methods.size(); ++m) {
    for (size_t d = 0; d < config.distractors.size(); ++d) {
      if (never.in_ser[m][d] != never.in_ser_no_rewrite ||
          never.anti_ser[m][d] != never.anti_ser_no_rewrite) {
        c.Fail("margin=inf changed SER");
      }
    }
  }

  // Empty context on every test utterance and method.
  config = LoadEvalConfig(kRoot + "/data/eval_config.json");
  EngineResources res = LoadEngineResources(config);
  const auto pools = LoadPools(config);
  const auto queries = ReadLines(config.anti_queries);
  const auto confusion = PoolConfusionModel(config, res, pools, queries);
  const auto utts = GenTestset(pools, queries, confusion, config.noise, res.wpm,
                               config.in_context, config.anti_context,
                               config.seed);
  const RewriteEngine engine(std::move(res), config.engine);
  const EntityContext empty = engine.CompileContext({});
  size_t decisions = 0;
  for (const auto& u : utts) {
    const Fst lattice = BuildSausage(u.slots, engine.PieceSymbols());
    for (Method m : AllMethods()) {
      const auto d = engine.Rewrite(lattice, empty, m);
      ++decisions;
      if (d.Rewritten() || d.transcript != d.original) {
        c.Fail("empty context rewrote " + u.id + " with " + MethodName(m));
      }
    }
  }
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "repeat run identical (%zu JSON bytes); margin=inf rewrites %zu; "
                "empty context %zu decisions without a rewrite",
                first.json.size(), never.rewrites, decisions);
  return buf;
}

}  // namespace
}  // namespace ctcrewrite

int main() {
  using namespace ctcrewrite;
  int failures = 0;
  EvalReport report;
  const std::vector<std::pair<std::string, std::function<std::string(Check&)>>>
      checks = {
          {"1 oracle equivalence", CheckOracle},
          {"2 edit-distance transducer", CheckEditDistance},
          {"3 sigma/rho matchers", CheckWildcards},
          {"4 log-determinization consensus", CheckLogDetConsensus},
          {"5 EM correctness", CheckEm},
          {"6 SER trend", [&](Check& c) { return CheckTrend(c, &report); }},
          {"7 planted-entity recovery", CheckPlanted},
          {"8 safety identities", [&](Check& c) { return CheckSafety(c, report); }},
      };
  for (const auto& [name, fn] : checks) {
    Check c;
    std::string detail;
    try {
      detail = fn(c);
    } catch (const std::exception& e) {
      c.Fail(std::string("exception: ") + e.what());
    }
    std::printf("[%s] %s: %s\n", c.Ok() ? "PASS" : "FAIL", name.c_str(),
                detail.c_str());
    for (const auto& p : c.problems) std::printf("    %s\n", p.c_str());
    std::fflush(stdout);
    failures += !c.Ok();
  }
  return failures == 0 ? 0 : 1;
}
