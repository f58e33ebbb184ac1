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

#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "ctcrewrite/errors.h"
#include "ctcrewrite/eval.h"
#include "ctcrewrite/fst_ops.h"

namespace ctcrewrite {
namespace {

const std::string kData = std::string(CTCREWRITE_SOURCE_DIR) + "/data/";

TEST(SerTest, Examples) {
  EXPECT_DOUBLE_EQ(ComputeSer({"a b", "c"}, {"a b", "c"}), 0.0);
  EXPECT_DOUBLE_EQ(ComputeSer({"a", "b", "c", "d"}, {"a", "b", "x", "d"}), 0.25);
  // Case, punctuation and spacing are normalized away.
  EXPECT_DOUBLE_EQ(ComputeSer({"Call Beth Byer."}, {"call  beth byer"}), 0.0);
  EXPECT_DOUBLE_EQ(ComputeSer({}, {}), 0.0);
  EXPECT_THROW(ComputeSer({"a"}, {}), DataError);
}

TEST(SerTest, SymmetricUnderJointPermutation) {
  std::mt19937_64 rng(4);
  std::vector<std::string> refs, hyps;
  for (int i = 0; i < 40; ++i) {
    refs.push_back("r" + std::to_string(i));
    hyps.push_back(rng() % 3 ? refs.back() : "h" + std::to_string(i));
  }
  const double base = ComputeSer(refs, hyps);
  for (int k = 0; k < 20; ++k) {
    std::vector<size_t> idx(refs.size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::shuffle(idx.begin(), idx.end(), rng);
    std::vector<std::string> r, h;
    for (size_t i : idx) {
      r.push_back(refs[i]);
      h.push_back(hyps[i]);
    }
    EXPECT_DOUBLE_EQ(ComputeSer(r, h), base);
  }
}

TEST(SerTest, RelativeReductionFormatting) {
  EXPECT_EQ(FormatPercent(RelativeReduction(0.40, 0.34)), "15.0%");
  EXPECT_EQ(FormatPercent(RelativeReduction(0.0, 0.0)), "0.0%");
  EXPECT_EQ(FormatPercent(RelativeReduction(0.5, 0.6)), "-20.0%");
}

std::vector<std::string> Pool(int n) {
  std::vector<std::string> v;
  for (int i = 0; i < n; ++i) v.push_back("Entity " + std::to_string(i));
  return v;
}

TEST(DistractorTest, Properties) {
  const auto pool = Pool(50);
  EXPECT_EQ(SampleDistractors(pool, 0, 1, std::string("Entity 3")),
            (std::vector<std::string>{"Entity 3"}));
  EXPECT_TRUE(SampleDistractors(pool, 0, 1, std::nullopt).empty());
  const auto small = SampleDistractors(pool, 10, 7, std::string("Entity 3"));
  const auto large = SampleDistractors(pool, 30, 7, std::string("Entity 3"));
  ASSERT_EQ(small.size(), 11u);
  ASSERT_EQ(large.size(), 31u);
  EXPECT_TRUE(std::equal(small.begin(), small.end(), large.begin()));
  EXPECT_EQ(std::set<std::string>(large.begin(), large.end()).size(), 31u);
  EXPECT_EQ(std::count(large.begin(), large.end(), "Entity 3"), 1);
  EXPECT_EQ(large, SampleDistractors(pool, 30, 7, std::string("Entity 3")));
  EXPECT_NE(large, SampleDistractors(pool, 30, 8, std::string("Entity 3")));
  // The truth is excluded from the draw even in another spelling.
  const auto anti = SampleDistractors(pool, 49, 1, std::string("entity 3!"));
  EXPECT_EQ(anti.size(), 50u);
  EXPECT_THROW(SampleDistractors(pool, 50, 1, std::string("Entity 3")),
               ConfigError);
  EXPECT_NO_THROW(SampleDistractors(pool, 50, 1, std::nullopt));
}

// Shared real-data setup; the alignment table is trained once.
class EvalDataTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    config_ = new EvalConfig(LoadEvalConfig(kData + "eval_config.json"));
    resources_ = new EngineResources(LoadEngineResources(*config_));
    pools_ = new std::vector<EntityPool>(LoadPools(*config_));
    queries_ = new std::vector<std::string>(ReadLines(config_->anti_queries));
    confusion_ = new ConfusionModel(
        PoolConfusionModel(*config_, *resources_, *pools_, *queries_));
  }
  static void TearDownTestSuite() {
    delete config_;
    delete resources_;
    delete pools_;
    delete queries_;
    delete confusion_;
  }

  static EvalConfig* config_;
  static EngineResources* resources_;
  static std::vector<EntityPool>* pools_;
  static std::vector<std::string>* queries_;
  static ConfusionModel* confusion_;
};

EvalConfig* EvalDataTest::config_ = nullptr;
EngineResources* EvalDataTest::resources_ = nullptr;
std::vector<EntityPool>* EvalDataTest::pools_ = nullptr;
std::vector<std::string>* EvalDataTest::queries_ = nullptr;
ConfusionModel* EvalDataTest::confusion_ = nullptr;

TEST_F(EvalDataTest, ConfigLoads) {
  EXPECT_EQ(config_->in_context, 50u);
  EXPECT_EQ(config_->anti_context, 20u);
  EXPECT_EQ(config_->distractors, (std::vector<size_t>{0, 30, 300}));
  EXPECT_EQ(config_->methods, AllMethods());
  EXPECT_EQ(pools_->size(), 3u);
  for (const auto& p : *pools_) EXPECT_FALSE(p.entities.empty());
}

TEST_F(EvalDataTest, ConfusionModelShape) {
  for (const auto& [piece, slot] : confusion_->alternatives) {
    ASSERT_EQ(slot.size(), config_->confusion.probs.size());
    EXPECT_EQ(slot[0].first, piece);
    double mass = 0.0;
    for (const auto& [alt, cost] : slot) {
      EXPECT_EQ(StartsWord(alt), StartsWord(piece));
      mass += std::exp(-cost);
    }
    EXPECT_LE(mass, 1.0 + 1e-9);
  }
}

TEST_F(EvalDataTest, TestsetCountsAndDeterminism) {
  const auto a = GenTestset(*pools_, *queries_, *confusion_, config_->noise,
                            resources_->wpm, 50, 20, 11);
  const auto b = GenTestset(*pools_, *queries_, *confusion_, config_->noise,
                            resources_->wpm, 50, 20, 11);
  ASSERT_EQ(a.size(), 70u);
  EXPECT_EQ(std::count_if(a.begin(), a.end(),
                          [](const auto& u) { return u.in_context; }),
            50);
  std::set<std::string> ids;
  for (size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].reference, b[i].reference);
    EXPECT_EQ(a[i].slots, b[i].slots);
    ids.insert(a[i].id);
    if (a[i].in_context) {
      ASSERT_TRUE(a[i].truth.has_value());
      // The carrier precedes the entity.
      const auto& pool = *std::find_if(
          pools_->begin(), pools_->end(),
          [&](const auto& p) { return p.type == a[i].type; });
      EXPECT_EQ(a[i].reference.rfind(pool.carrier + " " + *a[i].truth, 0), 0u);
    } else {
      EXPECT_FALSE(a[i].truth.has_value());
    }
  }
  EXPECT_EQ(ids.size(), 70u);
}

TEST_F(EvalDataTest, ZeroNoiseKeepsReferences) {
  const NoiseOptions quiet{0.0, 0.0, 0.0};
  const auto set = GenTestset(*pools_, *queries_, *confusion_, quiet,
                              resources_->wpm, 12, 6, 3);
  auto syms = std::make_shared<SymbolTable>();
  for (const auto& p : resources_->wpm.Pieces()) syms->AddSymbol(p);
  for (const auto& u : set) {
    const auto best = ShortestPaths(BuildSausage(u.slots, syms), 1).at(0);
    std::vector<std::string> pieces;
    for (Label l : best.ilabels) pieces.push_back(syms->Symbol(l));
    EXPECT_EQ(pieces, u.pieces);
    EXPECT_EQ(GlueWordpieces(pieces), NormalizeText(u.reference));
  }
}

TEST_F(EvalDataTest, EmptyPoolsAreConfigErrors) {
  std::vector<EntityPool> empty = {{"app", "open", {}, "", 0.0}};
  EXPECT_THROW(GenTestset(empty, *queries_, *confusion_, config_->noise,
                          resources_->wpm, 1, 0, 1),
               ConfigError);
  EXPECT_THROW(GenTestset({}, *queries_, *confusion_, config_->noise,
                          resources_->wpm, 1, 0, 1),
               ConfigError);
  EXPECT_THROW(GenTestset(*pools_, {}, *confusion_, config_->noise,
                          resources_->wpm, 0, 1, 1),
               ConfigError);
}

TEST_F(EvalDataTest, ThousandBestRecallsMoreThanOneBest) {
  const RewriteEngine engine(*resources_, config_->engine);
  std::vector<std::string> all;
  for (const auto& p : *pools_) {
    all.insert(all.end(), p.entities.begin(), p.entities.end());
  }
  const auto set = GenTestset(*pools_, *queries_, *confusion_, config_->noise,
                              resources_->wpm, 15, 0, 21);
  int strictly_more = 0;
  for (size_t u = 0; u < set.size(); ++u) {
    const Fst lattice = BuildSausage(set[u].slots, engine.PieceSymbols());
    const auto ctx =
        engine.CompileContext(SampleDistractors(all, 30, u, set[u].truth));
    auto recalled = [&](Method m) {
      std::set<std::string> out;
      const auto d = engine.Decide(engine.AnalyzeWords(lattice, m), ctx, {m});
      for (const auto& s : d.at(0).spans) {
        for (const auto& c : s.decision.candidates) out.insert(c.entity);
      }
      return out;
    };
    const auto one = recalled(Method::kNbest1);
    const auto many = recalled(Method::kNbest1000);
    EXPECT_TRUE(std::includes(many.begin(), many.end(), one.begin(), one.end()))
        << set[u].reference;
    strictly_more += many.size() > one.size();
  }
  EXPECT_GT(strictly_more, 0);
}

EvalConfig SmallConfig() {
  EvalConfig c = LoadEvalConfig(kData + "eval_config.json");
  c.in_context = 6;
  c.anti_context = 4;
  c.distractors = {0, 5};
  return c;
}

TEST(RunEvalTest, DeterministicAndComplete) {
  const EvalConfig c = SmallConfig();
  const EvalReport a = RunEval(c);
  const EvalReport b = RunEval(c);
  EXPECT_EQ(a.json, b.json);
  EXPECT_EQ(a.csv, b.csv);
  ASSERT_EQ(a.in_ser.size(), c.methods.size());
  for (size_t m = 0; m < c.methods.size(); ++m) {
    ASSERT_EQ(a.in_ser[m].size(), c.distractors.size());
    for (size_t d = 0; d < c.distractors.size(); ++d) {
      EXPECT_GE(a.in_ser[m][d], 0.0);
      EXPECT_LE(a.in_ser[m][d], 1.0);
      // Anti-context rewrites can only add errors.
      EXPECT_GE(a.anti_ser[m][d], a.anti_ser_no_rewrite);
    }
  }
  // Header, the no-rewrite row and one row per grid cell.
  EXPECT_EQ(std::count(a.csv.begin(), a.csv.end(), '\n'),
            static_cast<long>(2 + c.methods.size() * c.distractors.size()));
}

TEST(RunEvalTest, ZeroNoiseZeroDistractorsChangesNothing) {
  EvalConfig c = SmallConfig();
  c.noise = {0.0, 0.0, 0.0};
  c.distractors = {0};
  const EvalReport r = RunEval(c);
  EXPECT_DOUBLE_EQ(r.in_ser_no_rewrite, 0.0);
  for (const auto& row : r.in_ser) {
    EXPECT_DOUBLE_EQ(row[0], r.in_ser_no_rewrite);
  }
}

TEST(RunEvalTest, MissingFilesNameThePath) {
  EvalConfig c = SmallConfig();
  c.lexicon = kData + "no_such_lexicon.tsv";
  try {
    RunEval(c);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("no_such_lexicon.tsv"),
              std::string::npos);
  }
  const auto dir = std::filesystem::temp_directory_path() / "ctcrewrite_cfg";
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "bad.json") << R"({"phonemes": "p.tsv"})";
  EXPECT_THROW(LoadEvalConfig((dir / "bad.json").string()), ConfigError);
  std::ofstream(dir / "broken.json") << "{";
  EXPECT_THROW(LoadEvalConfig((dir / "broken.json").string()), ConfigError);
  EXPECT_THROW(LoadEvalConfig((dir / "absent.json").string()), ConfigError);
}

}  // namespace
}  // namespace ctcrewrite
