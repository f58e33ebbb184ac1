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

#ifndef CTCREWRITE_EVAL_H_
#define CTCREWRITE_EVAL_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ctcrewrite/g2p.h"
#include "ctcrewrite/lattice.h"
#include "ctcrewrite/phonetics.h"
#include "ctcrewrite/rewrite.h"

namespace ctcrewrite {

struct ConfusionOptions {
  // Slot probabilities: reference first, then the nearest alternatives.
  std::vector<double> probs = {0.55, 0.2, 0.12, 0.08};
};

// Alternatives for each of `pieces`: the phonetically nearest vocabulary
// pieces with the same word-start status. A piece's reading is its most
// frequent alignment mapping; readings are compared by an edit distance
// whose substitution cost grows with feature distance, spelling breaking
// ties.
ConfusionModel BuildConfusionModel(const std::vector<std::string>& pieces,
                                   const WordpieceModel& wpm,
                                   const AlignmentTable& table,
                                   const PhonemeInventory& inventory,
                                   const ConfusionOptions& options);

struct EntityPool {
  std::string type;
  std::string carrier;
  std::vector<std::string> entities;
  // Optional trailing carrier word, used for a share of utterances.
  std::string suffix;
  double suffix_prob = 0.0;
};

struct NoiseOptions {
  double carrier_flip = 0.05;
  double entity_flip = 0.35;
  double anti_flip = 0.1;
};

struct TestUtterance {
  std::string id;
  bool in_context = false;
  std::string type;  // pool type, or "anti"
  std::string reference;
  std::optional<std::string> truth;
  std::vector<std::string> pieces;
  std::vector<Slot> slots;
};

// In-context utterances pair a pool's carrier with one of its entities,
// cycling through pools; anti-context utterances draw from `queries`.
// Deterministic given `seed`. Throws ConfigError for empty pools.
std::vector<TestUtterance> GenTestset(const std::vector<EntityPool>& pools,
                                      const std::vector<std::string>& queries,
                                      const ConfusionModel& confusion,
                                      const NoiseOptions& noise,
                                      const WordpieceModel& wpm,
                                      size_t in_context, size_t anti_context,
                                      uint64_t seed);

// n distinct non-truth entities from `pool`, plus the truth when given.
// Nested in n for a fixed seed. Throws ConfigError when the pool is too
// small.
std::vector<std::string> SampleDistractors(
    const std::vector<std::string>& pool, size_t n, uint64_t seed,
    const std::optional<std::string>& truth);

// Fraction of normalized mismatches. Throws DataError on length mismatch.
double ComputeSer(const std::vector<std::string>& refs,
                  const std::vector<std::string>& hyps);
// (base - expt) / base, as a fraction; 0 when base is 0.
double RelativeReduction(double base, double expt);
// "15.0%"
std::string FormatPercent(double fraction);

struct EvalConfig {
  std::string base_dir;
  std::string phonemes, lexicon, wpm, grammar, anti_queries;
  std::string alignments;  // optional; trained when empty
  int em_iterations = 20;
  size_t top_k = 2000;
  std::vector<EntityPool> pools;
  std::vector<std::string> pool_files;
  size_t in_context = 50;
  size_t anti_context = 20;
  std::vector<size_t> distractors = {0, 30, 300};
  std::vector<Method> methods;
  uint64_t seed = 1;
  NoiseOptions noise;
  ConfusionOptions confusion;
  EngineOptions engine;
};

// Paths in the config resolve against the config file's directory.
// Throws ConfigError for missing keys or files.
EvalConfig LoadEvalConfig(const std::string& path);

// Reads the inventory, vocabulary, lexicon and grammar, and the alignment
// table (trained by EM when the config names none).
EngineResources LoadEngineResources(const EvalConfig& config);
// Config pools with their entity files read.
std::vector<EntityPool> LoadPools(const EvalConfig& config);
// Confusion model over every piece the pools and queries can produce.
ConfusionModel PoolConfusionModel(const EvalConfig& config,
                                  const EngineResources& res,
                                  const std::vector<EntityPool>& pools,
                                  const std::vector<std::string>& queries);
// Non-empty lines of a text file. Throws ConfigError naming the path.
std::vector<std::string> ReadLines(const std::string& path);

struct EvalReport {
  std::string json;
  std::string csv;
  // SER per method (config order) and distractor count.
  std::vector<std::vector<double>> in_ser;
  std::vector<std::vector<double>> anti_ser;
  double in_ser_no_rewrite = 0.0;
  double anti_ser_no_rewrite = 0.0;
  size_t rewrites = 0;  // rewritten utterances over the whole grid
};

EvalReport RunEval(const EvalConfig& config);

}  // namespace ctcrewrite

#endif  // CTCREWRITE_EVAL_H_
