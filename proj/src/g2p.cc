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

#include "ctcrewrite/g2p.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "ctcrewrite/errors.h"
#include "ctcrewrite/lattice.h"

namespace ctcrewrite {
namespace {

std::vector<std::string> SplitSpaces(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream in{std::string(text)};
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

std::vector<std::string> SplitTabs(const std::string& line) {
  std::vector<std::string> fields;
  size_t pos = 0;
  while (true) {
    const size_t tab = line.find('\t', pos);
    fields.push_back(line.substr(pos, tab - pos));
    if (tab == std::string::npos) break;
    pos = tab + 1;
  }
  return fields;
}

std::string Join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) {
    if (!out.empty()) out += ' ';
    out += p;
  }
  return out;
}

// Adds the loop first:p1, eps:p2 .. eps:pn through state 0.
void AddLoop(Fst& fst, Label first, const std::vector<Label>& phones,
             Weight weight) {
  if (phones.empty()) {
    fst.AddArc(0, first, kEpsilon, weight, 0);
    return;
  }
  StateId s = 0;
  for (size_t k = 0; k < phones.size(); ++k) {
    const StateId next = k + 1 == phones.size() ? 0 : fst.AddState();
    fst.AddArc(s, k == 0 ? first : kEpsilon, phones[k],
               k == 0 ? weight : Weight::One(), next);
    s = next;
  }
}

}  // namespace

WordpieceModel::WordpieceModel(std::vector<std::string> pieces)
    : pieces_(std::move(pieces)) {
  for (const auto& p : pieces_) {
    if (p.empty() || p == kWordStart) {
      throw DataError("empty wordpiece in vocabulary");
    }
    set_.insert(p);
    max_len_ = std::max(max_len_, p.size());
  }
  for (char c = 'a'; c <= 'z'; ++c) {
    const std::string bare(1, c);
    if (!set_.count(bare) || !set_.count(std::string(kWordStart) + bare)) {
      throw DataError("wordpiece vocabulary lacks single character '" + bare +
                      "'");
    }
  }
}

WordpieceModel WordpieceModel::ReadFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open wordpiece vocabulary: " + path);
  std::vector<std::string> pieces;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) pieces.push_back(line);
  }
  return WordpieceModel(std::move(pieces));
}

bool WordpieceModel::Contains(std::string_view piece) const {
  return set_.count(std::string(piece)) > 0;
}

std::vector<std::string> WordpieceModel::Segment(std::string_view word) const {
  std::vector<std::string> out;
  size_t pos = 0;
  while (pos < word.size()) {
    const std::string prefix = pos == 0 ? std::string(kWordStart) : "";
    size_t len = std::min(word.size() - pos, max_len_ - std::min(max_len_, prefix.size()));
    for (; len > 0; --len) {
      std::string cand = prefix + std::string(word.substr(pos, len));
      if (set_.count(cand)) {
        out.push_back(std::move(cand));
        break;
      }
    }
    if (len == 0) {
      throw DataError("cannot segment '" + std::string(word) + "'");
    }
    pos += len;
  }
  return out;
}

std::vector<std::string> WordpieceModel::SegmentText(
    std::string_view text) const {
  std::vector<std::string> out;
  for (const auto& w : SplitSpaces(text)) {
    for (auto& p : Segment(w)) out.push_back(std::move(p));
  }
  return out;
}

std::vector<LexiconEntry> ReadLexicon(std::istream& in,
                                      const PhonemeInventory* inventory) {
  std::vector<LexiconEntry> lexicon;
  std::unordered_map<std::string, size_t> index;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = SplitTabs(line);
    const std::string where = "lexicon line " + std::to_string(line_no);
    if (fields.size() != 3 || fields[0].empty()) {
      throw DataError(where + ": expected word<TAB>phonemes<TAB>frequency");
    }
    auto phones = SplitSpaces(fields[1]);
    if (phones.empty()) throw DataError(where + ": empty pronunciation");
    if (inventory) {
      for (const auto& p : phones) inventory->Features(p);
    }
    int64_t freq = 0;
    try {
      size_t used = 0;
      freq = std::stoll(fields[2], &used);
      if (used != fields[2].size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw DataError(where + ": bad frequency");
    }
    if (freq < 1) throw DataError(where + ": frequency must be >= 1");
    auto [it, fresh] = index.emplace(fields[0], lexicon.size());
    if (fresh) lexicon.push_back({fields[0], {}, freq});
    auto& prons = lexicon[it->second].pronunciations;
    if (std::find(prons.begin(), prons.end(), phones) == prons.end()) {
      prons.push_back(std::move(phones));
    }
  }
  return lexicon;
}

std::vector<LexiconEntry> ReadLexiconFile(const std::string& path,
                                          const PhonemeInventory* inventory) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open lexicon: " + path);
  return ReadLexicon(in, inventory);
}

std::vector<AlignmentPair> MakeAlignmentPairs(
    const std::vector<LexiconEntry>& lexicon, const WordpieceModel& wpm) {
  std::vector<AlignmentPair> pairs;
  for (const auto& e : lexicon) {
    const auto pieces = wpm.Segment(e.word);
    for (const auto& pron : e.pronunciations) {
      pairs.push_back({pieces, pron, static_cast<double>(e.frequency)});
    }
  }
  return pairs;
}

double IBM2Params::T(std::string_view phoneme, std::string_view piece) const {
  auto pi = piece_index.find(std::string(piece));
  auto fi = phoneme_index.find(std::string(phoneme));
  if (pi == piece_index.end() || fi == phoneme_index.end()) return 0.0;
  return t[pi->second * phonemes.size() + fi->second];
}

double IBM2Params::A(int i, int j, int l, int m) const {
  auto it = a.find({l, m});
  if (it == a.end()) return 1.0 / (l + 1);
  return it->second[j * (l + 1) + i];
}

namespace {

struct IndexedPair {
  std::vector<int> src;
  std::vector<int> tgt;
  double weight;
};

// One E-step; fills counts when non-null and returns the log-likelihood.
double EStep(const IBM2Params& params, const std::vector<IndexedPair>& corpus,
             std::vector<double>* t_counts,
             std::map<std::pair<int, int>, std::vector<double>>* a_counts) {
  const size_t nph = params.phonemes.size();
  double ll = 0.0;
  std::vector<double> probs;
  for (const auto& p : corpus) {
    // src[0] is the null piece, so positions run 0..l.
    const int l = static_cast<int>(p.src.size()) - 1;
    const int n = l + 1;
    const int m = static_cast<int>(p.tgt.size());
    auto ait = params.a.find({l, m});
    const double* a = ait == params.a.end() ? nullptr : ait->second.data();
    std::vector<double>* ac = nullptr;
    if (a_counts) {
      auto& v = (*a_counts)[{l, m}];
      if (v.empty()) v.assign(static_cast<size_t>(n) * m, 0.0);
      ac = &v;
    }
    probs.resize(n);
    for (int j = 0; j < m; ++j) {
      double denom = 0.0;
      for (int i = 0; i < n; ++i) {
        const double ap = a ? a[j * n + i] : 1.0 / n;
        probs[i] = params.t[p.src[i] * nph + p.tgt[j]] * ap;
        denom += probs[i];
      }
      ll += p.weight * std::log(denom);
      if (!t_counts) continue;
      for (int i = 0; i < n; ++i) {
        const double post = p.weight * probs[i] / denom;
        (*t_counts)[p.src[i] * nph + p.tgt[j]] += post;
        (*ac)[j * n + i] += post;
      }
    }
  }
  return ll;
}

}  // namespace

IBM2Result TrainIBM2(const std::vector<AlignmentPair>& pairs, int iterations) {
  if (iterations < 1) throw ConfigError("iterations must be >= 1");
  if (pairs.empty()) throw DataError("empty alignment corpus");
  IBM2Result result;
  IBM2Params& params = result.params;
  std::vector<IndexedPair> corpus;
  corpus.reserve(pairs.size());
  params.piece_index.emplace(std::string(kNullPiece), 0);
  params.pieces.emplace_back(kNullPiece);
  for (const auto& p : pairs) {
    if (p.pieces.empty() || p.phonemes.empty()) {
      throw DataError("alignment pair with an empty side");
    }
    if (!(p.weight > 0)) throw DataError("alignment pair weight must be > 0");
    IndexedPair ip{{0}, {}, p.weight};
    for (const auto& s : p.pieces) {
      auto [it, fresh] = params.piece_index.emplace(
          s, static_cast<int>(params.pieces.size()));
      if (fresh) params.pieces.push_back(s);
      ip.src.push_back(it->second);
    }
    for (const auto& s : p.phonemes) {
      auto [it, fresh] = params.phoneme_index.emplace(
          s, static_cast<int>(params.phonemes.size()));
      if (fresh) params.phonemes.push_back(s);
      ip.tgt.push_back(it->second);
    }
    corpus.push_back(std::move(ip));
  }
  const size_t npc = params.pieces.size();
  const size_t nph = params.phonemes.size();
  params.t.assign(npc * nph, 1.0 / nph);

  for (int iter = 1; iter <= iterations; ++iter) {
    std::vector<double> tc(npc * nph, 0.0);
    std::map<std::pair<int, int>, std::vector<double>> ac;
    result.log_likelihood.push_back(EStep(params, corpus, &tc, &ac));
    for (size_t s = 0; s < npc; ++s) {
      double total = 0.0;
      for (size_t f = 0; f < nph; ++f) total += tc[s * nph + f];
      for (size_t f = 0; f < nph; ++f) {
        params.t[s * nph + f] = tc[s * nph + f] / total;
      }
    }
    if (iter <= kModel1Iterations) continue;
    for (auto& [lm, counts] : ac) {
      const int n = lm.first + 1, m = lm.second;
      for (int j = 0; j < m; ++j) {
        double total = 0.0;
        for (int i = 0; i < n; ++i) total += counts[j * n + i];
        for (int i = 0; i < n; ++i) counts[j * n + i] /= total;
      }
    }
    params.a = std::move(ac);
  }
  result.log_likelihood.push_back(EStep(params, corpus, nullptr, nullptr));
  return result;
}

std::vector<PieceSpan> ViterbiSpans(const IBM2Params& params,
                                    const AlignmentPair& pair) {
  const int l = static_cast<int>(pair.pieces.size());
  const int m = static_cast<int>(pair.phonemes.size());
  std::vector<std::vector<int>> assigned(l);
  for (int j = 0; j < m; ++j) {
    int best = 0;
    double best_p = -1.0;
    for (int i = 0; i < l; ++i) {
      const double p = params.T(pair.phonemes[j], pair.pieces[i]) *
                       params.A(i + 1, j, l, m);
      if (p > best_p) {
        best_p = p;
        best = i;
      }
    }
    assigned[best].push_back(j);
  }
  std::vector<PieceSpan> spans(l);
  for (int i = 0; i < l; ++i) {
    const auto& js = assigned[i];
    if (js.empty()) continue;
    spans[i].contiguous = js.back() - js.front() + 1 ==
                          static_cast<int>(js.size());
    for (int j = js.front(); j <= js.back(); ++j) {
      spans[i].phonemes.push_back(pair.phonemes[j]);
    }
  }
  return spans;
}

AlignmentTable::AlignmentTable(std::vector<AlignmentEntry> entries)
    : entries_(std::move(entries)) {
  std::stable_sort(entries_.begin(), entries_.end(),
                   [](const AlignmentEntry& a, const AlignmentEntry& b) {
                     if (a.piece != b.piece) return a.piece < b.piece;
                     if (a.count != b.count) return a.count > b.count;
                     return a.phonemes < b.phonemes;
                   });
  for (size_t i = 0; i < entries_.size(); ++i) {
    by_piece_[entries_[i].piece].push_back(i);
  }
}

std::vector<const AlignmentEntry*> AlignmentTable::MappingsFor(
    std::string_view piece) const {
  std::vector<const AlignmentEntry*> out;
  auto it = by_piece_.find(std::string(piece));
  if (it == by_piece_.end()) return out;
  for (size_t i : it->second) out.push_back(&entries_[i]);
  return out;
}

bool AlignmentTable::Covers(std::string_view piece) const {
  return by_piece_.count(std::string(piece)) > 0;
}

void AlignmentTable::Write(std::ostream& out) const {
  char buf[64];
  for (const auto& e : entries_) {
    std::snprintf(buf, sizeof(buf), "%.17g", e.count);
    out << e.piece << '\t' << Join(e.phonemes) << '\t' << buf << '\n';
  }
}

AlignmentTable AlignmentTable::Read(std::istream& in) {
  std::vector<AlignmentEntry> entries;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = SplitTabs(line);
    const std::string where = "alignment table line " + std::to_string(line_no);
    if (fields.size() != 3 || fields[0].empty()) {
      throw DataError(where + ": expected piece<TAB>phonemes<TAB>count");
    }
    AlignmentEntry e{fields[0], SplitSpaces(fields[1]), 0.0};
    try {
      size_t used = 0;
      e.count = std::stod(fields[2], &used);
      if (used != fields[2].size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw DataError(where + ": bad count");
    }
    entries.push_back(std::move(e));
  }
  return AlignmentTable(std::move(entries));
}

void AlignmentTable::WriteFile(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write alignment table: " + path);
  Write(out);
}

AlignmentTable AlignmentTable::ReadFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open alignment table: " + path);
  return Read(in);
}

AlignmentTable ExtractAlignments(const IBM2Params& params,
                                 const std::vector<AlignmentPair>& pairs,
                                 size_t top_k) {
  using Key = std::pair<std::string, std::vector<std::string>>;
  std::map<Key, double> counts;
  std::map<Key, double> fallback;
  std::vector<std::string> seen;
  std::unordered_set<std::string> seen_set;
  for (const auto& pair : pairs) {
    const auto spans = ViterbiSpans(params, pair);
    for (size_t i = 0; i < spans.size(); ++i) {
      const std::string& piece = pair.pieces[i];
      if (seen_set.insert(piece).second) seen.push_back(piece);
      Key key{piece, spans[i].phonemes};
      (spans[i].contiguous ? counts : fallback)[key] += pair.weight;
    }
  }
  auto better = [](const std::pair<const Key, double>* a,
                   const std::pair<const Key, double>* b) {
    if (a->second != b->second) return a->second > b->second;
    return a->first < b->first;
  };
  // Best mapping per piece.
  std::map<std::string, const std::pair<const Key, double>*> best;
  for (const auto& kv : counts) {
    auto& slot = best[kv.first.first];
    if (!slot || better(&kv, slot)) slot = &kv;
  }
  std::set<std::string> contiguous;
  for (const auto& [piece, kv] : best) contiguous.insert(piece);
  for (const auto& kv : fallback) {
    if (contiguous.count(kv.first.first)) continue;
    auto& slot = best[kv.first.first];
    if (!slot || better(&kv, slot)) slot = &kv;
  }
  std::vector<AlignmentEntry> entries;
  std::set<Key> kept;
  for (const auto& [piece, kv] : best) {
    entries.push_back({piece, kv->first.second, kv->second});
    kept.insert(kv->first);
  }
  std::vector<const std::pair<const Key, double>*> ranked;
  for (const auto& kv : counts) ranked.push_back(&kv);
  std::sort(ranked.begin(), ranked.end(), better);
  for (const auto* kv : ranked) {
    if (entries.size() >= top_k) break;
    if (kept.insert(kv->first).second) {
      entries.push_back({kv->first.first, kv->first.second, kv->second});
    }
  }
  return AlignmentTable(std::move(entries));
}

double Coverage(const AlignmentTable& table, const WordpieceModel& wpm) {
  if (wpm.Pieces().empty()) return 0.0;
  size_t covered = 0;
  for (const auto& p : wpm.Pieces()) covered += table.Covers(p);
  return static_cast<double>(covered) / wpm.Pieces().size();
}

Fst BuildWFst(const AlignmentTable& table, const WordpieceModel& wpm,
              SymbolTablePtr piece_syms, SymbolTablePtr phone_syms,
              double skip_penalty) {
  if (table.Size() == 0) throw ConfigError("empty alignment table");
  Fst fst(piece_syms, phone_syms);
  fst.AddState();
  fst.SetStart(0);
  fst.SetFinal(0);
  for (const auto& e : table.Entries()) {
    std::vector<Label> phones;
    for (const auto& p : e.phonemes) phones.push_back(phone_syms->FindOrThrow(p));
    AddLoop(fst, piece_syms->FindOrThrow(e.piece), phones, Weight::One());
  }
  for (const auto& piece : wpm.Pieces()) {
    if (table.Covers(piece)) continue;
    fst.AddArc(0, piece_syms->FindOrThrow(piece), kEpsilon,
               Weight(skip_penalty), 0);
  }
  return fst;
}

Fst BuildG2pFst(const std::vector<LexiconEntry>& lexicon,
                SymbolTablePtr word_syms, SymbolTablePtr phone_syms) {
  if (lexicon.empty()) throw ConfigError("empty lexicon");
  Fst fst(word_syms, phone_syms);
  fst.AddState();
  fst.SetStart(0);
  fst.SetFinal(0);
  for (const auto& e : lexicon) {
    const Label w = word_syms->FindOrThrow(e.word);
    for (const auto& pron : e.pronunciations) {
      std::vector<Label> phones;
      for (const auto& p : pron) phones.push_back(phone_syms->FindOrThrow(p));
      AddLoop(fst, w, phones, Weight::One());
    }
  }
  return fst;
}

}  // namespace ctcrewrite
