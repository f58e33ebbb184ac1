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

#ifndef CTCREWRITE_G2P_H_
#define CTCREWRITE_G2P_H_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "ctcrewrite/fst.h"
#include "ctcrewrite/phonetics.h"

namespace ctcrewrite {

// Wordpiece vocabulary; word-initial pieces carry the U+2581 prefix.
class WordpieceModel {
 public:
  // Throws DataError when a lowercase letter is missing in either form.
  explicit WordpieceModel(std::vector<std::string> pieces);
  static WordpieceModel ReadFile(const std::string& path);

  const std::vector<std::string>& Pieces() const { return pieces_; }
  bool Contains(std::string_view piece) const;

  // Greedy longest match, left to right. Throws DataError for characters
  // outside the vocabulary.
  std::vector<std::string> Segment(std::string_view word) const;
  // Segments each space-separated word in turn.
  std::vector<std::string> SegmentText(std::string_view text) const;

 private:
  std::vector<std::string> pieces_;
  std::unordered_set<std::string> set_;
  size_t max_len_ = 0;
};

struct LexiconEntry {
  std::string word;
  std::vector<std::vector<std::string>> pronunciations;
  int64_t frequency = 1;
};

// `word<TAB>phonemes<TAB>frequency`; repeated words merge their
// pronunciations (first frequency wins). When `inventory` is set every
// phoneme must be in it (InventoryError otherwise).
std::vector<LexiconEntry> ReadLexicon(std::istream& in,
                                      const PhonemeInventory* inventory);
std::vector<LexiconEntry> ReadLexiconFile(const std::string& path,
                                          const PhonemeInventory* inventory);

struct AlignmentPair {
  std::vector<std::string> pieces;
  std::vector<std::string> phonemes;
  double weight = 1.0;
};

// One pair per (word, pronunciation), weighted by word frequency.
std::vector<AlignmentPair> MakeAlignmentPairs(
    const std::vector<LexiconEntry>& lexicon, const WordpieceModel& wpm);

inline constexpr std::string_view kNullPiece = "<null>";

// Phoneme-given-wordpiece translation table and position alignment table
// a(i | j, l, m) for source length l and target length m. Source position 0
// is the null piece (phonemes explained by no wordpiece); wordpiece k of a
// pair sits at position k + 1.
class IBM2Params {
 public:
  double T(std::string_view phoneme, std::string_view piece) const;
  double A(int i, int j, int l, int m) const;

  std::vector<std::string> pieces;
  std::vector<std::string> phonemes;
  std::unordered_map<std::string, int> piece_index;
  std::unordered_map<std::string, int> phoneme_index;
  // Row-major pieces x phonemes.
  std::vector<double> t;
  // (l, m) -> m x (l + 1) row-major: a[j * (l + 1) + i].
  std::map<std::pair<int, int>, std::vector<double>> a;
};

struct IBM2Result {
  IBM2Params params;
  // log_likelihood[k] is the weighted corpus log-likelihood after k
  // iterations; index 0 is the uniform initialization.
  std::vector<double> log_likelihood;
};

inline constexpr int kModel1Iterations = 2;

// EM for IBM Model 2 with frequency-weighted expected counts and a null
// source piece in every pair. The first
// kModel1Iterations keep the alignment table uniform (Model 1). Throws
// DataError for pairs with an empty side, ConfigError for iterations < 1.
IBM2Result TrainIBM2(const std::vector<AlignmentPair>& pairs, int iterations);

// Phonemes assigned to one wordpiece by the Viterbi alignment of a pair.
// Each phoneme goes to its argmax wordpiece position; the null piece takes
// part in training only.
// A non-contiguous assignment is flagged and holds the phonemes between
// its first and last position.
struct PieceSpan {
  bool contiguous = true;
  std::vector<std::string> phonemes;
};
std::vector<PieceSpan> ViterbiSpans(const IBM2Params& params,
                                    const AlignmentPair& pair);

struct AlignmentEntry {
  std::string piece;
  std::vector<std::string> phonemes;
  double count = 0.0;
};

class AlignmentTable {
 public:
  AlignmentTable() = default;
  explicit AlignmentTable(std::vector<AlignmentEntry> entries);

  const std::vector<AlignmentEntry>& Entries() const { return entries_; }
  size_t Size() const { return entries_.size(); }
  // Entries for `piece`, most frequent first.
  std::vector<const AlignmentEntry*> MappingsFor(std::string_view piece) const;
  bool Covers(std::string_view piece) const;

  // `piece<TAB>phonemes<TAB>count` lines.
  void Write(std::ostream& out) const;
  static AlignmentTable Read(std::istream& in);
  void WriteFile(const std::string& path) const;
  static AlignmentTable ReadFile(const std::string& path);

 private:
  std::vector<AlignmentEntry> entries_;
  std::unordered_map<std::string, std::vector<size_t>> by_piece_;
};

// Counts Viterbi spans (frequency-weighted), keeps each observed piece's
// most frequent mapping, then fills up to `top_k` entries by global count.
// Pieces whose every span was non-contiguous fall back to the phonemes
// between their first and last aligned position.
AlignmentTable ExtractAlignments(const IBM2Params& params,
                                 const std::vector<AlignmentPair>& pairs,
                                 size_t top_k);

// Fraction of `wpm` pieces with at least one mapping.
double Coverage(const AlignmentTable& table, const WordpieceModel& wpm);

// Single-state transducer: each mapping is a loop wp:p1, eps:p2 .. eps:pn
// at cost 0; empty mappings are wp:eps self-loops. Pieces of `wpm` without
// mappings become wp:eps self-loops at `skip_penalty`.
Fst BuildWFst(const AlignmentTable& table, const WordpieceModel& wpm,
              SymbolTablePtr piece_syms, SymbolTablePtr phone_syms,
              double skip_penalty);

// Closure of word:pronunciation paths. Every pronunciation is a loop
// word:p1, eps:p2 .. eps:pn through the start state, which is final, so
// word sequences map to concatenated pronunciations.
Fst BuildG2pFst(const std::vector<LexiconEntry>& lexicon,
                SymbolTablePtr word_syms, SymbolTablePtr phone_syms);

}  // namespace ctcrewrite

#endif  // CTCREWRITE_G2P_H_
