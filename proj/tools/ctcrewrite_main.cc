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

// Command-line front end: alignment training, engine compilation, single
// lattice rewriting, evaluation sweeps and FST debugging utilities.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "ctcrewrite/errors.h"
#include "ctcrewrite/eval.h"
#include "ctcrewrite/fst_ops.h"
#include "ctcrewrite/fst_text.h"
#include "ctcrewrite/lattice.h"

namespace ctcrewrite {
namespace {

namespace fs = std::filesystem;

std::string ReadText(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteText(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << text;
}

// Engine overrides shared by `rewrite` and `build-engine`.
struct EngineFlags {
  std::optional<double> margin, unit_cost, tau, lambda, skip_penalty;
  std::optional<int> max_edits;
  bool wordpiece_expansion = false;

  void Add(CLI::App* cmd) {
    cmd->add_option("--margin", margin, "rewrite margin (inf disables)");
    cmd->add_option("--unit-cost", unit_cost, "edit cost");
    cmd->add_option("--max-edits", max_edits, "edits allowed per span");
    cmd->add_option("--tau", tau, "phoneme similarity threshold");
    cmd->add_option("--lambda", lambda, "phoneme substitution scale");
    cmd->add_option("--skip-penalty", skip_penalty,
                    "cost of a piece without alignments");
    cmd->add_flag("--wordpiece-expansion", wordpiece_expansion,
                  "expand similar phonemes in the wordpiece pipeline");
  }
  void Apply(EngineOptions& o) const {
    if (margin) o.margin = *margin;
    if (unit_cost) o.unit_cost = *unit_cost;
    if (max_edits) o.max_edits = *max_edits;
    if (tau) o.tau = *tau;
    if (lambda) o.lambda = *lambda;
    if (skip_penalty) o.skip_penalty = *skip_penalty;
    if (wordpiece_expansion) o.wordpiece_expansion = true;
  }
};

int TrainAlign(const std::string& lexicon_path, const std::string& wpm_path,
               const std::string& phonemes_path, int iterations, size_t top_k,
               const std::string& out_path) {
  const auto inventory = PhonemeInventory::ReadFile(phonemes_path);
  const auto wpm = WordpieceModel::ReadFile(wpm_path);
  const auto lexicon = ReadLexiconFile(lexicon_path, &inventory);
  const auto pairs = MakeAlignmentPairs(lexicon, wpm);
  const auto result = TrainIBM2(pairs, iterations);
  const auto table = ExtractAlignments(result.params, pairs, top_k);
  table.WriteFile(out_path);
  std::fprintf(stderr, "pairs %zu  entries %zu  coverage %.3f  loglik %.6g\n",
               pairs.size(), table.Entries().size(), Coverage(table, wpm),
               result.log_likelihood.back());
  return 0;
}

int BuildEngine(const std::string& config_path,
                const std::string& context_path, const EngineFlags& flags,
                const std::string& out_dir) {
  EvalConfig config = LoadEvalConfig(config_path);
  flags.Apply(config.engine);
  const RewriteEngine engine(LoadEngineResources(config), config.engine);
  const auto ctx = engine.CompileContext(ReadLines(context_path));
  fs::create_directories(out_dir);
  auto path = [&](const char* name) { return (fs::path(out_dir) / name).string(); };
  engine.PieceSymbols()->WriteFile(path("pieces.syms"));
  engine.WordSymbols()->WriteFile(path("words.syms"));
  engine.PhonemeSymbols()->WriteFile(path("phonemes.syms"));
  engine.Resources().alignments.WriteFile(path("alignments.tsv"));
  WriteFstTextFile(engine.WordpieceTagger(), path("tagger_wordpiece.fst"));
  WriteFstTextFile(engine.WordTagger(), path("tagger_word.fst"));
  WriteFstTextFile(engine.W(), path("wordpiece_to_phonemes.fst"));
  WriteFstTextFile(engine.G(), path("g2p.fst"));
  WriteFstTextFile(engine.P(), path("phoneme_expander.fst"));
  WriteFstTextFile(engine.E(), path("edits.fst"));
  WriteFstTextFile(ctx.s_prime, path("entities.fst"));
  nlohmann::ordered_json manifest;
  manifest["entities"] = ctx.entities;
  manifest["unmappable"] = ctx.unmappable;
  const auto& o = config.engine;
  manifest["options"] = {{"unit_cost", o.unit_cost},
                         {"max_edits", o.max_edits},
                         {"tau", o.tau},
                         {"lambda", o.lambda},
                         {"skip_penalty", o.skip_penalty},
                         {"margin", std::isinf(o.margin)
                                        ? nlohmann::ordered_json("inf")
                                        : nlohmann::ordered_json(o.margin)},
                         {"wordpiece_expansion", o.wordpiece_expansion}};
  WriteText(path("manifest.json"), manifest.dump(1) + "\n");
  std::fprintf(stderr, "%zu entities compiled, %zu unmappable, written to %s\n",
               ctx.entities.size(), ctx.unmappable.size(), out_dir.c_str());
  return 0;
}

// Slots JSON, or AT&T text over the engine's wordpiece symbols.
Fst LoadLattice(const std::string& path, const RewriteEngine& engine) {
  const std::string text = ReadText(path);
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    return BuildSausage(SlotsFromJson(text), engine.PieceSymbols());
  }
  std::istringstream in(text);
  return ReadFstText(in, engine.PieceSymbols(), engine.PieceSymbols());
}

int Rewrite(const std::string& config_path, const std::string& context_path,
            const std::string& lattice_path,
            const std::vector<std::string>& method_names,
            const EngineFlags& flags, size_t top) {
  EvalConfig config = LoadEvalConfig(config_path);
  flags.Apply(config.engine);
  std::vector<Method> methods;
  for (const auto& m : method_names) methods.push_back(ParseMethod(m));
  const RewriteEngine engine(LoadEngineResources(config), config.engine);
  const auto ctx = engine.CompileContext(
      context_path.empty() ? std::vector<std::string>()
                           : ReadLines(context_path));
  const Fst lattice = LoadLattice(lattice_path, engine);
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (Method m : methods) {
    out.push_back(nlohmann::ordered_json::parse(
        engine.Rewrite(lattice, ctx, m).ToJson(top)));
  }
  std::cout << (out.size() == 1 ? out[0] : out).dump(1) << "\n";
  return 0;
}

int Eval(const std::string& config_path, const std::string& out_path,
         const std::string& csv_path, std::optional<size_t> in_context,
         std::optional<size_t> anti_context, std::optional<uint64_t> seed) {
  EvalConfig config = LoadEvalConfig(config_path);
  if (in_context) config.in_context = *in_context;
  if (anti_context) config.anti_context = *anti_context;
  if (seed) config.seed = *seed;
  const EvalReport report = RunEval(config);
  if (!out_path.empty()) WriteText(out_path, report.json + "\n");
  if (!csv_path.empty()) WriteText(csv_path, report.csv);
  std::cout << report.csv;
  return 0;
}

SymbolTablePtr MaybeSyms(const std::string& path) {
  if (path.empty()) return nullptr;
  return std::make_shared<const SymbolTable>(SymbolTable::ReadFile(path));
}

Semiring ParseSemiring(const std::string& name) {
  if (name == "tropical") return Semiring::kTropical;
  if (name == "log") return Semiring::kLog;
  throw ConfigError("unknown semiring: " + name);
}

ComposeMode ParseMode(const std::string& name) {
  if (name == "exact") return ComposeMode::kExact;
  if (name == "sigma") return ComposeMode::kSigmaRight;
  if (name == "rho") return ComposeMode::kRhoLeft;
  throw ConfigError("unknown compose mode: " + name);
}

}  // namespace
}  // namespace ctcrewrite

int main(int argc, char** argv) {
  using namespace ctcrewrite;
  CLI::App app{"Contextual rewriting of CTC wordpiece lattices"};
  app.require_subcommand(1);

  auto* train = app.add_subcommand("train-align",
                                   "train wordpiece-to-phoneme alignments");
  std::string lexicon, wpm, phonemes, out;
  int iterations = 20;
  size_t top_k = 2000;
  train->add_option("--lexicon", lexicon, "pronunciation lexicon TSV")
      ->required();
  train->add_option("--wpm", wpm, "wordpiece vocabulary")->required();
  train->add_option("--phonemes", phonemes, "phoneme feature table")
      ->required();
  train->add_option("--iterations", iterations, "EM iterations");
  train->add_option("--top-k", top_k, "alignment table size");
  train->add_option("--out", out, "output alignment table")->required();

  auto* build = app.add_subcommand(
      "build-engine", "compile the engine FSTs for a context and dump them");
  std::string config, context, out_dir;
  EngineFlags build_flags;
  build->add_option("--config", config, "resource config JSON")->required();
  build->add_option("--context", context, "entities, one per line")
      ->required();
  build->add_option("--out", out_dir, "output directory")->required();
  build_flags.Add(build);

  auto* rewrite = app.add_subcommand("rewrite", "rewrite one lattice");
  std::string lattice;
  std::vector<std::string> methods = {"wp+logdet+compsc"};
  size_t top = 10;
  EngineFlags rewrite_flags;
  rewrite->add_option("--config", config, "resource config JSON")->required();
  rewrite->add_option("--context", context, "entities, one per line");
  rewrite->add_option("--lattice", lattice,
                      "slots JSON or AT&T text over wordpieces")
      ->required();
  rewrite->add_option("--method", methods, "one or more methods");
  rewrite->add_option("--top", top, "candidates per span in the output");
  rewrite_flags.Add(rewrite);

  auto* eval = app.add_subcommand("eval", "run an evaluation sweep");
  std::string csv;
  std::optional<size_t> in_context, anti_context;
  std::optional<uint64_t> seed;
  eval->add_option("--config", config, "evaluation config JSON")->required();
  eval->add_option("--out", out, "JSON report path");
  eval->add_option("--csv", csv, "CSV grid path");
  eval->add_option("--in-context", in_context, "override in-context count");
  eval->add_option("--anti-context", anti_context,
                   "override anti-context count");
  eval->add_option("--seed", seed, "override seed");

  auto* fst = app.add_subcommand("fst", "FST utilities on AT&T text files");
  fst->require_subcommand(1);
  std::string isyms, osyms, semiring = "log", mode = "exact", side = "output";
  std::vector<std::string> inputs;
  size_t nbest = 1;
  auto add_common = [&](CLI::App* c, int n_inputs) {
    c->add_option("inputs", inputs, "input FST files")
        ->required()
        ->expected(n_inputs);
    c->add_option("--isyms", isyms, "input symbol table");
    c->add_option("--osyms", osyms, "output symbol table");
  };
  auto* f_compose = fst->add_subcommand("compose", "compose two FSTs");
  add_common(f_compose, 2);
  f_compose->add_option("--mode", mode, "exact, sigma or rho");
  auto* f_det = fst->add_subcommand("determinize", "determinize an acceptor");
  add_common(f_det, 1);
  f_det->add_option("--semiring", semiring, "tropical or log");
  auto* f_proj = fst->add_subcommand("project", "project onto one side");
  add_common(f_proj, 1);
  f_proj->add_option("--side", side, "input or output");
  auto* f_nbest = fst->add_subcommand("nbest", "print the n best paths");
  add_common(f_nbest, 1);
  f_nbest->add_option("-n", nbest, "number of paths");
  auto* f_count = fst->add_subcommand("count", "count paths");
  add_common(f_count, 1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*train) {
      return TrainAlign(lexicon, wpm, phonemes, iterations, top_k, out);
    }
    if (*build) return BuildEngine(config, context, build_flags, out_dir);
    if (*rewrite) {
      return Rewrite(config, context, lattice, methods, rewrite_flags, top);
    }
    if (*eval) return Eval(config, out, csv, in_context, anti_context, seed);
    if (*fst) {
      const auto is = MaybeSyms(isyms);
      const auto os = MaybeSyms(osyms);
      if (*f_compose) {
        // Left output and right input share the middle alphabet; only the
        // outer tables are known here.
        const Fst a = ReadFstTextFile(inputs[0], is, nullptr);
        const Fst b = ReadFstTextFile(inputs[1], nullptr, os);
        WriteFstText(Compose(a, b, ParseMode(mode)), std::cout);
        return 0;
      }
      const Fst f = ReadFstTextFile(inputs[0], is, os);
      if (*f_det) {
        WriteFstText(Determinize(f, ParseSemiring(semiring)), std::cout);
      } else if (*f_proj) {
        if (side != "input" && side != "output") {
          throw ConfigError("side must be input or output");
        }
        WriteFstText(side == "input" ? ProjectInput(f) : ProjectOutput(f),
                     std::cout);
      } else if (*f_nbest) {
        for (const auto& p : ShortestPaths(f, nbest)) {
          std::string in_s, out_s;
          for (Label l : p.ilabels) {
            in_s += (in_s.empty() ? "" : " ") +
                    (is ? is->Symbol(l) : std::to_string(l));
          }
          for (Label l : p.olabels) {
            out_s += (out_s.empty() ? "" : " ") +
                     (os ? os->Symbol(l) : std::to_string(l));
          }
          std::cout << FormatCost(p.cost) << "\t" << in_s << "\t" << out_s
                    << "\n";
        }
      } else if (*f_count) {
        std::cout << PathCount(f) << "\n";
      }
      return 0;
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 2;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
