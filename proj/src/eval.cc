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

#include "ctcrewrite/eval.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "ctcrewrite/errors.h"
#include "ctcrewrite/fst_ops.h"

namespace ctcrewrite {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string Bare(const std::string& piece) {
  return StartsWord(piece) ? piece.substr(kWordStart.size()) : piece;
}

template <typename T>
double EditDistance(const std::vector<T>& a, const std::vector<T>& b,
                    const auto& sub_cost) {
  std::vector<double> prev(b.size() + 1), cur(b.size() + 1);
  for (size_t j = 0; j <= b.size(); ++j) prev[j] = static_cast<double>(j);
  for (size_t i = 1; i <= a.size(); ++i) {
    cur[0] = static_cast<double>(i);
    for (size_t j = 1; j <= b.size(); ++j) {
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1,
                         prev[j - 1] + sub_cost(a[i - 1], b[j - 1])});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::string ReadText(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::vector<std::string> ReadLines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

ConfusionModel BuildConfusionModel(const std::vector<std::string>& pieces,
                                   const WordpieceModel& wpm,
                                   const AlignmentTable& table,
                                   const PhonemeInventory& inventory,
                                   const ConfusionOptions& options) {
  if (options.probs.empty()) throw ConfigError("confusion probs empty");
  double mass = 0.0;
  for (double p : options.probs) {
    if (!(p > 0)) throw ConfigError("confusion probs must be positive");
    mass += p;
  }
  if (mass > 1.0 + 1e-9) throw ConfigError("confusion probs exceed 1");
  auto reading = [&](const std::string& piece) {
    const auto maps = table.MappingsFor(piece);
    return maps.empty() ? std::vector<std::string>() : maps.front()->phonemes;
  };
  auto phone_sub = [&](const std::string& a, const std::string& b) {
    return a == b ? 0.0 : std::min(1.0, inventory.Distance(a, b) / 3.0);
  };
  auto char_sub = [](char a, char b) { return a == b ? 0.0 : 1.0; };
  ConfusionModel model;
  const size_t want = options.probs.size() - 1;
  for (const auto& piece : pieces) {
    if (model.alternatives.count(piece)) continue;
    if (!wpm.Contains(piece)) {
      throw ConfigError("piece outside the vocabulary: " + piece);
    }
    const auto ra = reading(piece);
    const std::string sa = Bare(piece);
    const std::vector<char> ca(sa.begin(), sa.end());
    std::vector<std::pair<double, std::string>> near;
    for (const auto& other : wpm.Pieces()) {
      if (other == piece || StartsWord(other) != StartsWord(piece)) continue;
      const std::string sb = Bare(other);
      const double d =
          EditDistance(ra, reading(other), phone_sub) +
          0.01 * EditDistance(ca, std::vector<char>(sb.begin(), sb.end()),
                              char_sub);
      near.emplace_back(d, other);
    }
    const size_t k = std::min(want, near.size());
    std::partial_sort(near.begin(), near.begin() + k, near.end());
    Slot slot = {{piece, -std::log(options.probs[0])}};
    for (size_t i = 0; i < k; ++i) {
      slot.push_back({near[i].second, -std::log(options.probs[i + 1])});
    }
    model.alternatives[piece] = std::move(slot);
  }
  return model;
}

std::vector<TestUtterance> GenTestset(const std::vector<EntityPool>& pools,
                                      const std::vector<std::string>& queries,
                                      const ConfusionModel& confusion,
                                      const NoiseOptions& noise,
                                      const WordpieceModel& wpm,
                                      size_t in_context, size_t anti_context,
                                      uint64_t seed) {
  if (in_context > 0) {
    if (pools.empty()) throw ConfigError("no entity pools");
    for (const auto& p : pools) {
      if (p.entities.empty()) throw ConfigError("empty pool: " + p.type);
    }
  }
  if (anti_context > 0 && queries.empty()) {
    throw ConfigError("empty anti-context query pool");
  }
  std::mt19937_64 rng(seed);
  std::vector<TestUtterance> out;
  char id[32];
  for (size_t i = 0; i < in_context; ++i) {
    const EntityPool& pool = pools[i % pools.size()];
    TestUtterance u;
    std::snprintf(id, sizeof(id), "in-%04zu", i);
    u.id = id;
    u.in_context = true;
    u.type = pool.type;
    const std::string entity = pool.entities[rng() % pool.entities.size()];
    const bool suffix =
        !pool.suffix.empty() && UniformUnit(rng) < pool.suffix_prob;
    u.truth = entity;
    u.reference = pool.carrier + " " + entity;
    if (suffix) u.reference += " " + pool.suffix;
    std::vector<double> flips;
    for (const auto& p : wpm.SegmentText(NormalizeText(pool.carrier))) {
      u.pieces.push_back(p);
      flips.push_back(noise.carrier_flip);
    }
    for (const auto& p : wpm.SegmentText(NormalizeText(entity))) {
      u.pieces.push_back(p);
      flips.push_back(noise.entity_flip);
    }
    if (suffix) {
      for (const auto& p : wpm.SegmentText(NormalizeText(pool.suffix))) {
        u.pieces.push_back(p);
        flips.push_back(noise.carrier_flip);
      }
    }
    u.slots = CorruptSlots(u.pieces, confusion, flips, rng);
    out.push_back(std::move(u));
  }
  for (size_t i = 0; i < anti_context; ++i) {
    TestUtterance u;
    std::snprintf(id, sizeof(id), "anti-%04zu", i);
    u.id = id;
    u.type = "anti";
    u.reference = queries[rng() % queries.size()];
    u.pieces = wpm.SegmentText(NormalizeText(u.reference));
    const std::vector<double> flips(u.pieces.size(), noise.anti_flip);
    u.slots = CorruptSlots(u.pieces, confusion, flips, rng);
    out.push_back(std::move(u));
  }
  return out;
}

std::vector<std::string> SampleDistractors(
    const std::vector<std::string>& pool, size_t n, uint64_t seed,
    const std::optional<std::string>& truth) {
  std::vector<std::string> candidates;
  std::set<std::string> seen;
  const std::string truth_key = truth ? NormalizeText(*truth) : "";
  for (const auto& e : pool) {
    const std::string key = NormalizeText(e);
    if ((truth && key == truth_key) || !seen.insert(key).second) continue;
    candidates.push_back(e);
  }
  if (candidates.size() < n) {
    throw ConfigError("distractor pool exhausted: need " + std::to_string(n) +
                      ", have " + std::to_string(candidates.size()));
  }
  // Partial Fisher-Yates with a fixed stream: prefixes are nested in n.
  std::mt19937_64 rng(seed);
  std::vector<std::string> out;
  if (truth) out.push_back(*truth);
  for (size_t i = 0; i < n; ++i) {
    const size_t j = i + rng() % (candidates.size() - i);
    std::swap(candidates[i], candidates[j]);
    out.push_back(candidates[i]);
  }
  return out;
}

double ComputeSer(const std::vector<std::string>& refs,
                  const std::vector<std::string>& hyps) {
  if (refs.size() != hyps.size()) {
    throw DataError("reference and hypothesis counts differ");
  }
  if (refs.empty()) return 0.0;
  size_t errors = 0;
  for (size_t i = 0; i < refs.size(); ++i) {
    errors += NormalizeText(refs[i]) != NormalizeText(hyps[i]);
  }
  return static_cast<double>(errors) / refs.size();
}

double RelativeReduction(double base, double expt) {
  return base == 0.0 ? 0.0 : (base - expt) / base;
}

std::string FormatPercent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f%%", fraction * 100.0);
  return buf;
}

EvalConfig LoadEvalConfig(const std::string& path) {
  const std::filesystem::path file(path);
  json doc;
  try {
    doc = json::parse(ReadText(path));
  } catch (const json::exception& e) {
    throw ConfigError("invalid config " + path + ": " + e.what());
  }
  EvalConfig c;
  c.base_dir = file.parent_path().string();
  auto resolve = [&](const std::string& rel) {
    return (file.parent_path() / rel).string();
  };
  auto need = [&](const char* key) -> const json& {
    if (!doc.contains(key)) {
      throw ConfigError(std::string("config lacks \"") + key + "\"");
    }
    return doc[key];
  };
  try {
    c.phonemes = resolve(need("phonemes").get<std::string>());
    c.lexicon = resolve(need("lexicon").get<std::string>());
    c.wpm = resolve(need("wpm").get<std::string>());
    c.grammar = resolve(need("grammar").get<std::string>());
    c.anti_queries = resolve(need("anti_queries").get<std::string>());
    if (doc.contains("alignments")) {
      c.alignments = resolve(doc["alignments"].get<std::string>());
    }
    c.em_iterations = doc.value("em_iterations", c.em_iterations);
    c.top_k = doc.value("top_k", c.top_k);
    for (const auto& p : need("pools")) {
      EntityPool pool;
      pool.type = p.at("type").get<std::string>();
      pool.carrier = p.at("carrier").get<std::string>();
      pool.suffix = p.value("suffix", std::string());
      pool.suffix_prob = p.value("suffix_prob", 0.0);
      c.pool_files.push_back(resolve(p.at("file").get<std::string>()));
      c.pools.push_back(std::move(pool));
    }
    c.in_context = doc.value("in_context", c.in_context);
    c.anti_context = doc.value("anti_context", c.anti_context);
    if (doc.contains("distractors")) {
      c.distractors = doc["distractors"].get<std::vector<size_t>>();
    }
    if (doc.contains("methods")) {
      for (const auto& m : doc["methods"]) {
        c.methods.push_back(ParseMethod(m.get<std::string>()));
      }
    } else {
      c.methods = AllMethods();
    }
    c.seed = doc.value("seed", c.seed);
    if (doc.contains("noise")) {
      const auto& n = doc["noise"];
      c.noise.carrier_flip = n.value("carrier_flip", c.noise.carrier_flip);
      c.noise.entity_flip = n.value("entity_flip", c.noise.entity_flip);
      c.noise.anti_flip = n.value("anti_flip", c.noise.anti_flip);
      if (n.contains("probs")) {
        c.confusion.probs = n["probs"].get<std::vector<double>>();
      }
    }
    if (doc.contains("engine")) {
      const auto& e = doc["engine"];
      EngineOptions& o = c.engine;
      o.unit_cost = e.value("unit_cost", o.unit_cost);
      o.max_edits = e.value("max_edits", o.max_edits);
      o.tau = e.value("tau", o.tau);
      o.lambda = e.value("lambda", o.lambda);
      o.skip_penalty = e.value("skip_penalty", o.skip_penalty);
      if (e.contains("margin")) {
        // null or "inf" both mean never rewrite.
        const auto& m = e["margin"];
        o.margin = m.is_number() ? m.get<double>() : INFINITY;
      }
      o.wordpiece_expansion =
          e.value("wordpiece_expansion", o.wordpiece_expansion);
      o.random_paths = e.value("random_paths", o.random_paths);
      o.random_seed = e.value("random_seed", o.random_seed);
    }
  } catch (const json::exception& e) {
    throw ConfigError("bad config value in " + path + ": " + e.what());
  }
  return c;
}

namespace {

struct UtteranceResult {
  // [distractor index][method index]
  std::vector<std::vector<RewriteDecision>> decisions;
};

}  // namespace

EngineResources LoadEngineResources(const EvalConfig& config) {
  EngineResources res{PhonemeInventory::ReadFile(config.phonemes),
                      WordpieceModel::ReadFile(config.wpm),
                      {},
                      {},
                      Grammar::ReadFile(config.grammar)};
  res.lexicon = ReadLexiconFile(config.lexicon, &res.inventory);
  if (!config.alignments.empty()) {
    res.alignments = AlignmentTable::ReadFile(config.alignments);
  } else {
    const auto pairs = MakeAlignmentPairs(res.lexicon, res.wpm);
    const auto trained = TrainIBM2(pairs, config.em_iterations);
    res.alignments = ExtractAlignments(trained.params, pairs, config.top_k);
  }
  return res;
}

std::vector<EntityPool> LoadPools(const EvalConfig& config) {
  std::vector<EntityPool> pools = config.pools;
  for (size_t i = 0; i < pools.size(); ++i) {
    pools[i].entities = ReadLines(config.pool_files.at(i));
  }
  return pools;
}

ConfusionModel PoolConfusionModel(const EvalConfig& config,
                                  const EngineResources& res,
                                  const std::vector<EntityPool>& pools,
                                  const std::vector<std::string>& queries) {
  // Confusions for every piece any utterance can contain.
  std::set<std::string> needed;
  auto add_text = [&](const std::string& text) {
    for (const auto& p : res.wpm.SegmentText(NormalizeText(text))) {
      needed.insert(p);
    }
  };
  for (const auto& pool : pools) {
    add_text(pool.carrier);
    if (!pool.suffix.empty()) add_text(pool.suffix);
    for (const auto& e : pool.entities) add_text(e);
  }
  for (const auto& q : queries) add_text(q);
  return BuildConfusionModel(
      std::vector<std::string>(needed.begin(), needed.end()), res.wpm,
      res.alignments, res.inventory, config.confusion);
}

EvalReport RunEval(const EvalConfig& config) {
  EngineResources res = LoadEngineResources(config);
  const std::vector<EntityPool> pools = LoadPools(config);
  std::vector<std::string> all_entities;
  for (const auto& pool : pools) {
    all_entities.insert(all_entities.end(), pool.entities.begin(),
                        pool.entities.end());
  }
  const auto queries = ReadLines(config.anti_queries);
  const ConfusionModel confusion =
      PoolConfusionModel(config, res, pools, queries);

  const auto utterances =
      GenTestset(pools, queries, confusion, config.noise, res.wpm,
                 config.in_context, config.anti_context, config.seed);
  const RewriteEngine engine(std::move(res), config.engine);

  std::vector<Method> wp_methods, word_methods;
  for (Method m : config.methods) {
    (IsWordpieceMethod(m) ? wp_methods : word_methods).push_back(m);
  }
  const size_t nd = config.distractors.size();
  const size_t nm = config.methods.size();
  std::vector<UtteranceResult> results(utterances.size());
  std::vector<std::string> originals(utterances.size());
  for (size_t u = 0; u < utterances.size(); ++u) {
    const TestUtterance& utt = utterances[u];
    const Fst lattice = BuildSausage(utt.slots, engine.PieceSymbols());
    const auto best = ShortestPaths(lattice, 1);
    std::vector<std::string> pieces;
    for (Label l : best.at(0).ilabels) {
      pieces.push_back(engine.PieceSymbols()->Symbol(l));
    }
    originals[u] = GlueLenient(pieces);
    std::vector<RewriteEngine::Analysis> analyses;
    std::vector<std::vector<Method>> groups;
    if (!wp_methods.empty()) {
      analyses.push_back(engine.AnalyzeWordpieces(lattice));
      groups.push_back(wp_methods);
    }
    for (Method m : word_methods) {
      analyses.push_back(engine.AnalyzeWords(lattice, m));
      groups.push_back({m});
    }
    auto& decisions = results[u].decisions;
    decisions.assign(nd, std::vector<RewriteDecision>(nm));
    for (size_t d = 0; d < nd; ++d) {
      const size_t n = config.distractors[d];
      std::vector<std::string> context;
      if (utt.in_context || n > 0) {
        context = SampleDistractors(all_entities, n, config.seed * 1000003 + u,
                                    utt.truth);
      }
      const EntityContext ctx = engine.CompileContext(context);
      for (size_t g = 0; g < analyses.size(); ++g) {
        const auto out = engine.Decide(analyses[g], ctx, groups[g]);
        for (size_t k = 0; k < groups[g].size(); ++k) {
          const size_t m = std::find(config.methods.begin(),
                                     config.methods.end(), groups[g][k]) -
                           config.methods.begin();
          decisions[d][m] = out[k];
        }
      }
    }
  }

  EvalReport report;
  std::vector<std::string> in_refs, in_orig, anti_refs, anti_orig;
  for (const auto& utt : utterances) {
    (utt.in_context ? in_refs : anti_refs).push_back(utt.reference);
  }
  for (size_t u = 0; u < utterances.size(); ++u) {
    (utterances[u].in_context ? in_orig : anti_orig).push_back(originals[u]);
  }
  report.in_ser_no_rewrite = ComputeSer(in_refs, in_orig);
  report.anti_ser_no_rewrite = ComputeSer(anti_refs, anti_orig);
  report.in_ser.assign(nm, std::vector<double>(nd));
  report.anti_ser.assign(nm, std::vector<double>(nd));
  ordered_json grid = ordered_json::array();
  std::string csv = "method,distractors,in_context_ser,anti_context_ser\n";
  char buf[128];
  std::snprintf(buf, sizeof(buf), "no-rewrite,-,%.6f,%.6f\n",
                report.in_ser_no_rewrite, report.anti_ser_no_rewrite);
  csv += buf;
  for (size_t m = 0; m < nm; ++m) {
    for (size_t d = 0; d < nd; ++d) {
      std::vector<std::string> in_hyp, anti_hyp;
      for (size_t u = 0; u < utterances.size(); ++u) {
        const auto& dec = results[u].decisions[d][m];
        report.rewrites += dec.Rewritten();
        (utterances[u].in_context ? in_hyp : anti_hyp)
            .push_back(dec.transcript);
      }
      report.in_ser[m][d] = ComputeSer(in_refs, in_hyp);
      report.anti_ser[m][d] = ComputeSer(anti_refs, anti_hyp);
      ordered_json cell;
      cell["method"] = MethodName(config.methods[m]);
      cell["distractors"] = config.distractors[d];
      cell["in_context_ser"] = report.in_ser[m][d];
      cell["anti_context_ser"] = report.anti_ser[m][d];
      cell["in_context_relative_reduction"] = FormatPercent(
          RelativeReduction(report.in_ser_no_rewrite, report.in_ser[m][d]));
      grid.push_back(cell);
      std::snprintf(buf, sizeof(buf), "%s,%zu,%.6f,%.6f\n",
                    MethodName(config.methods[m]).c_str(),
                    config.distractors[d], report.in_ser[m][d],
                    report.anti_ser[m][d]);
      csv += buf;
    }
  }

  // Per-utterance records and expt-vs-base wins and losses.
  auto index_of = [&](Method m) -> int {
    auto it = std::find(config.methods.begin(), config.methods.end(), m);
    return it == config.methods.end()
               ? -1
               : static_cast<int>(it - config.methods.begin());
  };
  const int base = index_of(Method::kNbest1);
  const int expt = index_of(Method::kWpLogDetCompSc);
  ordered_json records = ordered_json::array();
  ordered_json winloss = ordered_json::array();
  for (size_t u = 0; u < utterances.size(); ++u) {
    const auto& utt = utterances[u];
    ordered_json rec;
    rec["id"] = utt.id;
    rec["set"] = utt.in_context ? "in-context" : "anti-context";
    rec["type"] = utt.type;
    rec["reference"] = utt.reference;
    rec["truth"] = utt.truth ? ordered_json(*utt.truth) : ordered_json(nullptr);
    rec["original"] = originals[u];
    ordered_json hyps = ordered_json::array();
    for (size_t d = 0; d < nd; ++d) {
      for (size_t m = 0; m < nm; ++m) {
        const auto& dec = results[u].decisions[d][m];
        ordered_json h;
        h["method"] = dec.method;
        h["distractors"] = config.distractors[d];
        h["verdict"] = dec.Rewritten() ? "rewrite" : "keep";
        h["transcript"] = dec.transcript;
        h["decision"] = ordered_json::parse(dec.ToJson(3));
        hyps.push_back(h);
      }
      if (base >= 0 && expt >= 0) {
        const auto& b = results[u].decisions[d][base].transcript;
        const auto& e = results[u].decisions[d][expt].transcript;
        const bool b_ok = NormalizeText(b) == NormalizeText(utt.reference);
        const bool e_ok = NormalizeText(e) == NormalizeText(utt.reference);
        if (b_ok != e_ok) {
          ordered_json wl;
          wl["id"] = utt.id;
          wl["distractors"] = config.distractors[d];
          wl["reference"] = utt.reference;
          wl["base"] = b;
          wl["expt"] = e;
          wl["outcome"] = e_ok ? "win" : "loss";
          winloss.push_back(wl);
        }
      }
    }
    rec["hypotheses"] = hyps;
    records.push_back(rec);
  }
  ordered_json doc;
  doc["seed"] = config.seed;
  doc["in_context"] = config.in_context;
  doc["anti_context"] = config.anti_context;
  doc["distractors"] = config.distractors;
  ordered_json methods = ordered_json::array();
  for (Method m : config.methods) methods.push_back(MethodName(m));
  doc["methods"] = methods;
  doc["no_rewrite"] = {{"in_context_ser", report.in_ser_no_rewrite},
                       {"anti_context_ser", report.anti_ser_no_rewrite}};
  doc["grid"] = grid;
  doc["win_loss"] = winloss;
  doc["utterances"] = records;
  report.json = doc.dump(1);
  report.csv = csv;
  return report;
}

}  // namespace ctcrewrite
