// Copyright 2026 The Spanedit Authors.
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

#include "cli.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "spanedit/bench.h"
#include "spanedit/checkpoint.h"
#include "spanedit/core.h"
#include "spanedit/decoder.h"
#include "spanedit/edit_io.h"
#include "spanedit/editops.h"
#include "spanedit/metrics.h"
#include "spanedit/model.h"
#include "spanedit/trainer.h"

namespace spanedit::cli {
namespace {

using nlohmann::json;

// Misuse of the command line detected after parsing.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

const std::vector<std::string> kMetricNames = {"ser", "exact", "sari",
                                               "span_prf", "tagging_prf"};

struct Streams {
  std::istream& in;
  std::ostream& out;
  std::ostream& err;
};

std::string ReadText(const std::string& path, std::istream& in) {
  std::ostringstream buf;
  if (path == "-") {
    buf << in.rdbuf();
  } else {
    std::ifstream file(path, std::ios::binary);
    if (!file) throw DataError("cannot open " + path);
    buf << file.rdbuf();
  }
  return buf.str();
}

// Lines of a file; empty lines are kept, a trailing newline is not a line.
std::vector<std::string> ReadLineList(const std::string& path,
                                      std::istream& in) {
  std::istringstream text(ReadText(path, in));
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(text, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

std::vector<TsvPair> ReadTsv(const std::string& path, std::istream& in) {
  std::istringstream text(ReadText(path, in));
  return ReadParallelTsv(text);
}

std::vector<EditRecord> ReadEdits(const std::string& path, std::istream& in) {
  std::istringstream text(ReadText(path, in));
  return ReadEditFile(text);
}

// Writes to `fallback` for "" or "-", otherwise to the named file.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) {
    if (path.empty() || path == "-") {
      stream_ = &fallback;
    } else {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
      if (!*file_) throw DataError("cannot write " + path);
      stream_ = file_.get();
    }
  }
  std::ostream& get() { return *stream_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_ = nullptr;
};

TagSet ResolveTagSet(const std::string& spec) {
  if (std::filesystem::is_regular_file(spec)) {
    return TagSet::Load(spec, std::filesystem::path(spec).stem().string());
  }
  try {
    return BuiltinTagSet(spec);
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string(e.what()) + " (or give a tag file path)");
  }
}

// Collects surfaces in first-seen order.
class VocabBuilder {
 public:
  void Add(const std::vector<std::string>& tokens) {
    for (const auto& t : tokens) {
      if (seen_.insert(t).second) order_.push_back(t);
    }
  }
  Vocabulary Build() const { return Vocabulary(order_); }

 private:
  std::set<std::string> seen_;
  std::vector<std::string> order_;
};

json ParseJsonObject(const std::string& text, const std::string& what) {
  json obj;
  try {
    obj = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(what + ": " + e.what());
  }
  if (!obj.is_object()) throw DataError(what + " must be a JSON object");
  return obj;
}

// ---- decode parameters shared by decode and bench ----

struct DecodeFlags {
  int beam = 0;
  double lambda_t = 0, lambda_p = 0, lambda_r = 0;
  double alpha = 0, identity_penalty = 0;
  int passes = 0, max_steps = 0;
  bool shortcuts = false;
  std::vector<CLI::Option*> options;

  void Register(CLI::App* app) {
    options = {
        app->add_option("--beam", beam, "Beam size (default 4)"),
        app->add_option("--lambda-t", lambda_t, "Tag weight (default 1)"),
        app->add_option("--lambda-p", lambda_p, "Span weight (default 1)"),
        app->add_option("--lambda-r", lambda_r,
                        "Replacement weight (default 1)"),
        app->add_option("--alpha", alpha,
                        "Length normalisation exponent (default 0)"),
        app->add_option("--identity-penalty", identity_penalty,
                        "Multiplier on the no-change hypothesis (default 1)"),
        app->add_option("--passes", passes,
                        "Refinement passes (default 1)"),
        app->add_option("--max-steps", max_steps,
                        "Sub-step cap, 0 = automatic (default 0)"),
        app->add_flag("--shortcuts", shortcuts,
                      "Skip predictable sub-steps after SELF and EOS"),
    };
  }

  // Built-in defaults, then the config file, then explicit flags.
  DecodeParams Resolve(const std::string& config_path, std::istream& in) const {
    DecodeParams p;
    if (!config_path.empty()) {
      p = DecodeParams::FromJson(ReadText(config_path, in), p);
    }
    if (options[0]->count()) p.beam_size = beam;
    if (options[1]->count()) p.lambda_tag = lambda_t;
    if (options[2]->count()) p.lambda_span = lambda_p;
    if (options[3]->count()) p.lambda_replacement = lambda_r;
    if (options[4]->count()) p.length_norm_alpha = alpha;
    if (options[5]->count()) p.identity_penalty = identity_penalty;
    if (options[6]->count()) p.refinement_passes = passes;
    if (options[7]->count()) p.max_steps = max_steps;
    if (options[8]->count()) p.shortcuts = shortcuts;
    try {
      p.Validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    return p;
  }
};

// ---- extract ----

struct ExtractArgs {
  std::string input, output = "-", tagset = "trivial", tokenize = "whitespace";
};

int Extract(const ExtractArgs& a, Streams s) {
  const TagSet tagset = ResolveTagSet(a.tagset);
  const TokenizeMode mode = ParseTokenizeMode(a.tokenize);
  const std::vector<TsvPair> pairs = ReadTsv(a.input, s.in);

  VocabBuilder vb;
  std::vector<std::vector<std::string>> srcs, tgts;
  for (const auto& p : pairs) {
    srcs.push_back(Tokenize(p.source, mode));
    tgts.push_back(Tokenize(p.target, mode));
    vb.Add(srcs.back());
    vb.Add(tgts.back());
  }
  const Vocabulary vocab = vb.Build();

  Sink sink(a.output, s.out);
  CorpusStatsAccumulator stats;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    try {
      const SourceSequence src(vocab.Encode(srcs[i]));
      const TargetSequence tgt{vocab.Encode(tgts[i])};
      std::optional<std::vector<TagId>> tags;
      if (pairs[i].tags) {
        tags.emplace();
        for (const auto& t : *pairs[i].tags) tags->push_back(tagset.Lookup(t));
      }
      const EditSequence edits = ExtractEdits(src, tgt, tags, tagset);
      sink.get() << FormatEditRecord(ToRecord(srcs[i], edits, tagset, vocab))
                 << '\n';
      stats.Add(src, tgt);
    } catch (const DataError& e) {
      throw DataError("line " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  const CorpusStats c = stats.Finish();
  char line[256];
  std::snprintf(line, sizeof(line),
                "sentences=%ld avg_source_len=%.3f avg_target_len=%.3f "
                "avg_edit_count=%.3f changed_token_fraction=%.4f\n",
                c.sentence_count, c.avg_source_len, c.avg_target_len,
                c.avg_edit_count, c.changed_token_fraction);
  s.err << line;
  return kExitOk;
}

// ---- apply ----

struct ApplyArgs {
  std::string edits, src, output = "-", tokenize = "whitespace";
};

int Apply(const ApplyArgs& a, Streams s) {
  const TokenizeMode mode = ParseTokenizeMode(a.tokenize);
  const std::vector<EditRecord> records = ReadEdits(a.edits, s.in);
  std::optional<std::vector<std::string>> src_lines;
  if (!a.src.empty()) {
    src_lines = ReadLineList(a.src, s.in);
    if (src_lines->size() != records.size()) {
      throw DataError("source file has " + std::to_string(src_lines->size()) +
                      " lines but the edit file has " +
                      std::to_string(records.size()));
    }
  }

  // Tags are free-form here: the tag set is whatever the file uses.
  VocabBuilder vb;
  std::vector<std::string> tag_names;
  std::set<std::string> seen_tags = {"SELF", "EOS"};
  for (const auto& r : records) {
    vb.Add(r.src);
    for (const auto& e : r.edits) {
      if (e.replacement) vb.Add({*e.replacement});
      if (seen_tags.insert(e.tag).second) tag_names.push_back(e.tag);
    }
  }
  const Vocabulary vocab = vb.Build();
  const TagSet tagset("file", tag_names);

  Sink sink(a.output, s.out);
  for (std::size_t i = 0; i < records.size(); ++i) {
    const EditRecord& r = records[i];
    try {
      if (src_lines && Tokenize((*src_lines)[i], mode) != r.src) {
        throw DataError("source line does not match the record's src");
      }
      const SourceSequence src(vocab.Encode(r.src));
      const TargetSequence out = ApplyEdits(src, FromRecord(r, tagset, vocab));
      const std::vector<std::string> words = vocab.Decode(out.tokens);
      sink.get() << Detokenize(words, mode) << '\n';
    } catch (const DataError& e) {
      throw DataError("line " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return kExitOk;
}

// ---- train ----

struct TrainArgs {
  std::string input, checkpoint, loss_csv, tagset = "trivial",
                                           tokenize = "whitespace", mode;
  int steps = 0, batch_size = 0, log_every = 100;
  double learning_rate = 0;
  CLI::Option* steps_opt = nullptr;
  CLI::Option* batch_opt = nullptr;
  CLI::Option* lr_opt = nullptr;
};

OptimizerConfig OptimizerFromJson(const json& obj) {
  OptimizerConfig c;
  for (const auto& [key, value] : obj.items()) {
    if (key == "learning_rate") c.learning_rate = value.get<double>();
    else if (key == "beta1") c.beta1 = value.get<double>();
    else if (key == "beta2") c.beta2 = value.get<double>();
    else if (key == "epsilon") c.epsilon = value.get<double>();
    else if (key == "batch_size") c.batch_size = value.get<int>();
    else if (key == "clip_norm") c.clip_norm = value.get<double>();
    else throw DataError("unknown optimizer field '" + key + "'");
  }
  return c;
}

std::vector<TrainExample> LoadTrainingData(const std::string& path,
                                           const TagSet& tagset,
                                           TokenizeMode mode, std::istream& in,
                                           Vocabulary* vocab) {
  std::vector<TrainExample> out;
  VocabBuilder vb;
  if (path.ends_with(".jsonl")) {
    const std::vector<EditRecord> records = ReadEdits(path, in);
    for (const auto& r : records) {
      vb.Add(r.src);
      for (const auto& e : r.edits) {
        if (e.replacement && e.tag != "SELF" && e.tag != "EOS") {
          vb.Add({*e.replacement});
        }
      }
    }
    *vocab = vb.Build();
    for (std::size_t i = 0; i < records.size(); ++i) {
      try {
        const SourceSequence src(vocab->Encode(records[i].src));
        const EditSequence edits =
            AnchorLeadingInsertions(src, FromRecord(records[i], tagset, *vocab));
        out.push_back({src, edits, ApplyEdits(src, edits)});
      } catch (const DataError& e) {
        throw DataError("line " + std::to_string(i + 1) + ": " + e.what());
      }
    }
    return out;
  }
  const std::vector<TsvPair> pairs = ReadTsv(path, in);
  std::vector<std::vector<std::string>> srcs, tgts;
  for (const auto& p : pairs) {
    srcs.push_back(Tokenize(p.source, mode));
    tgts.push_back(Tokenize(p.target, mode));
    vb.Add(srcs.back());
    vb.Add(tgts.back());
  }
  *vocab = vb.Build();
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    try {
      std::optional<std::vector<TagId>> tags;
      if (pairs[i].tags) {
        tags.emplace();
        for (const auto& t : *pairs[i].tags) tags->push_back(tagset.Lookup(t));
      }
      out.push_back(MakeExample(SourceSequence(vocab->Encode(srcs[i])),
                                TargetSequence{vocab->Encode(tgts[i])}, tags,
                                tagset));
    } catch (const DataError& e) {
      throw DataError("line " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return out;
}

int Train(const TrainArgs& a, const std::string& config_path,
          std::uint64_t seed, Streams s) {
  const TagSet tagset = ResolveTagSet(a.tagset);
  const TokenizeMode tokenize = ParseTokenizeMode(a.tokenize);

  ModelConfig model_config;
  OptimizerConfig optimizer;
  int steps = 1000;
  if (!config_path.empty()) {
    const json cfg = ParseJsonObject(ReadText(config_path, s.in), "config");
    for (const auto& [key, value] : cfg.items()) {
      if (key == "model") {
        model_config = ModelConfigFromJson(value.dump());
      } else if (key == "optimizer") {
        optimizer = OptimizerFromJson(value);
      } else if (key == "steps") {
        steps = value.get<int>();
      } else {
        throw DataError("unknown training config field '" + key + "'");
      }
    }
  }
  if (a.steps_opt->count()) steps = a.steps;
  if (a.batch_opt->count()) optimizer.batch_size = a.batch_size;
  if (a.lr_opt->count()) optimizer.learning_rate = a.learning_rate;
  if (!a.mode.empty()) model_config.mode = ParseModelMode(a.mode);
  if (steps < 0) throw UsageError("--steps must be >= 0");

  Vocabulary vocab;
  std::vector<TrainExample> examples =
      LoadTrainingData(a.input, tagset, tokenize, s.in, &vocab);
  model_config.vocab_size = static_cast<int>(vocab.size());
  model_config.tagset_size = static_cast<int>(tagset.size());
  try {
    model_config.Validate();
    optimizer.Validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  EditModel model(model_config, seed);
  s.err << "model: " << ModeName(model_config.mode) << ", "
        << model.parameter_count() << " parameters, " << examples.size()
        << " examples\n";
  Trainer trainer(model, std::move(examples), optimizer, seed);
  const std::vector<StepRecord> records =
      trainer.Run(steps, [&](const StepRecord& r) {
        if (a.log_every > 0 && (r.step % a.log_every == 0 || r.step == 1)) {
          char line[96];
          std::snprintf(line, sizeof(line), "step %d loss %.6f\n", r.step,
                        r.loss.total);
          s.err << line;
        }
      });

  SaveCheckpoint(a.checkpoint, model, vocab, tagset, tokenize, seed);
  const std::string csv_path =
      a.loss_csv.empty() ? a.checkpoint + ".loss.csv" : a.loss_csv;
  Sink csv(csv_path, s.out);
  WriteLossCsv(csv.get(), records);
  return kExitOk;
}

// ---- decode ----

struct DecodeArgs {
  std::string checkpoint, input, output = "-", nbest, gold, mode;
  bool greedy = false, oracle_tags = false, oracle_spans = false,
       allow_repeat = false;
  DecodeFlags flags;
};

json HypothesisJson(const Hypothesis& h, const Checkpoint& ckpt) {
  json obj;
  obj["output"] = Detokenize(ckpt.vocabulary.Decode(h.output.tokens),
                             ckpt.tokenize);
  obj["score"] = h.score;
  obj["raw_score"] = h.raw_score;
  if (!h.edits.ops.empty()) {
    const EditRecord rec = ToRecord(ckpt.vocabulary.Decode(h.source), h.edits,
                                    ckpt.tagset, ckpt.vocabulary);
    obj["edits"] = json::parse(FormatEditRecord(rec))["edits"];
  }
  return obj;
}

int DecodeCmd(const DecodeArgs& a, const std::string& config_path,
              Streams s) {
  const DecodeParams params = a.flags.Resolve(config_path, s.in);
  if ((a.oracle_tags || a.oracle_spans) && a.gold.empty()) {
    throw UsageError("--oracle-tags/--oracle-spans need --gold edits");
  }
  Checkpoint ckpt = LoadCheckpoint(a.checkpoint);
  if (!a.mode.empty() && ParseModelMode(a.mode) != ckpt.model.config().mode) {
    throw UsageError("--mode " + a.mode + " does not match the checkpoint (" +
                     ModeName(ckpt.model.config().mode) + ")");
  }
  const std::vector<std::string> lines = ReadLineList(a.input, s.in);
  std::vector<EditRecord> gold;
  if (a.oracle_tags || a.oracle_spans) {
    gold = ReadEdits(a.gold, s.in);
    if (gold.size() != lines.size()) {
      throw DataError("gold edit file has " + std::to_string(gold.size()) +
                      " records for " + std::to_string(lines.size()) +
                      " inputs");
    }
  }

  Sink sink(a.output, s.out);
  std::optional<Sink> nbest;
  if (!a.nbest.empty()) nbest.emplace(a.nbest, s.out);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::vector<Hypothesis> hyps;
    try {
      const SourceSequence src(
          ckpt.vocabulary.Encode(Tokenize(lines[i], ckpt.tokenize)));
      if (!gold.empty()) {
        const EditSequence g = AnchorLeadingInsertions(
            src, FromRecord(gold[i], ckpt.tagset, ckpt.vocabulary));
        if (g.source_len != src.length()) {
          throw DataError("gold edits describe a different source length");
        }
        hyps = ConstrainedDecode(
            ckpt.model, src, params,
            OracleConstraint::FromEdits(g, a.oracle_tags, a.oracle_spans,
                                        a.allow_repeat));
      } else if (a.greedy) {
        hyps = {GreedyDecode(ckpt.model, src, params)};
      } else {
        hyps = Decode(ckpt.model, src, params);
      }
    } catch (const DataError& e) {
      throw DataError("line " + std::to_string(i + 1) + ": " + e.what());
    } catch (const SearchError& e) {
      throw SearchError("line " + std::to_string(i + 1) + ": " + e.what(),
                        e.best_partial());
    }
    sink.get() << Detokenize(ckpt.vocabulary.Decode(hyps.front().output.tokens),
                             ckpt.tokenize)
               << '\n';
    if (nbest) {
      json list = json::array();
      for (const auto& h : hyps) list.push_back(HypothesisJson(h, ckpt));
      nbest->get() << json{{"line", i + 1}, {"nbest", list}}.dump() << '\n';
    }
  }
  return kExitOk;
}

// ---- score ----

struct ScoreArgs {
  std::string hyp, src, gold, hyp_edits, json_out, metrics = "ser,exact",
                                                   tokenize = "whitespace",
                                                   tagset;
  std::vector<std::string> refs;
  double beta = 0.5;
  bool project_spans = false;
};

std::vector<std::string> SplitMetrics(const std::string& list) {
  std::vector<std::string> out;
  std::stringstream in(list);
  std::string name;
  while (std::getline(in, name, ',')) {
    if (name.empty()) continue;
    if (std::find(kMetricNames.begin(), kMetricNames.end(), name) ==
        kMetricNames.end()) {
      std::string valid;
      for (const auto& m : kMetricNames) valid += (valid.empty() ? "" : ", ") + m;
      throw UsageError("unknown metric '" + name + "'; valid metrics: " + valid);
    }
    out.push_back(name);
  }
  if (out.empty()) throw UsageError("no metrics requested");
  return out;
}

json PrfJson(const std::string& name, const SpanMatchReport& r, double beta) {
  return {{"metric", name},          {"value", r.f_beta},
          {"beta", beta},            {"precision", r.precision},
          {"recall", r.recall},      {"true_positives", r.true_positives},
          {"hyp_count", r.hyp_count}, {"gold_count", r.gold_count}};
}

int Score(const ScoreArgs& a, Streams s) {
  const std::vector<std::string> metrics = SplitMetrics(a.metrics);
  const TokenizeMode mode = ParseTokenizeMode(a.tokenize);
  auto tokenize_all = [&](const std::vector<std::string>& lines) {
    std::vector<Sentence> out;
    for (const auto& l : lines) out.push_back(Tokenize(l, mode));
    return out;
  };
  auto need = [](bool ok, const std::string& what) {
    if (!ok) throw UsageError(what);
  };

  const std::vector<Sentence> hyps = tokenize_all(ReadLineList(a.hyp, s.in));
  std::vector<std::vector<Sentence>> refs;
  for (const auto& path : a.refs) {
    refs.push_back(tokenize_all(ReadLineList(path, s.in)));
    if (refs.back().size() != hyps.size()) {
      throw DataError(path + " has " + std::to_string(refs.back().size()) +
                      " lines, hypotheses have " + std::to_string(hyps.size()));
    }
  }
  std::vector<Sentence> srcs;
  if (!a.src.empty()) {
    srcs = tokenize_all(ReadLineList(a.src, s.in));
    if (srcs.size() != hyps.size()) {
      throw DataError("source has " + std::to_string(srcs.size()) +
                      " lines, hypotheses have " + std::to_string(hyps.size()));
    }
  }

  // Edit sequences for the span metrics: read from files or extracted.
  std::vector<EditRecord> gold_records, hyp_records;
  if (!a.gold.empty()) gold_records = ReadEdits(a.gold, s.in);
  if (!a.hyp_edits.empty()) hyp_records = ReadEdits(a.hyp_edits, s.in);
  // Extracted edits use the trivial tag set; files may add their own tags.
  VocabBuilder vb;
  std::vector<std::string> tag_names;
  std::set<std::string> seen_tags = {"SELF", "EOS"};
  const TagSet trivial = BuiltinTagSet("trivial");
  for (const auto& t : trivial.tags()) {
    if (seen_tags.insert(t).second) tag_names.push_back(t);
  }
  for (const auto* list : {&gold_records, &hyp_records}) {
    for (const auto& r : *list) {
      vb.Add(r.src);
      for (const auto& e : r.edits) {
        if (e.replacement) vb.Add({*e.replacement});
        if (seen_tags.insert(e.tag).second) tag_names.push_back(e.tag);
      }
    }
  }
  for (const auto& h : hyps) vb.Add(h);
  for (const auto& r : refs) for (const auto& x : r) vb.Add(x);
  for (const auto& x : srcs) vb.Add(x);
  const Vocabulary vocab = vb.Build();
  const TagSet tagset =
      a.tagset.empty() ? TagSet("file", tag_names) : ResolveTagSet(a.tagset);

  auto edits_for = [&](const std::vector<EditRecord>& records,
                       const std::vector<Sentence>* targets,
                       const std::string& what) {
    std::vector<EditSequence> out;
    if (!records.empty()) {
      if (records.size() != hyps.size()) {
        throw DataError(what + " edit file has " +
                        std::to_string(records.size()) + " records for " +
                        std::to_string(hyps.size()) + " hypotheses");
      }
      for (const auto& r : records) out.push_back(FromRecord(r, tagset, vocab));
      return out;
    }
    need(!srcs.empty() && targets != nullptr,
         "span_prf needs --" + what + "-edits or --src with " + what +
             " text");
    for (std::size_t i = 0; i < srcs.size(); ++i) {
      out.push_back(ExtractEdits(SourceSequence(vocab.Encode(srcs[i])),
                                 TargetSequence{vocab.Encode((*targets)[i])},
                                 std::nullopt, tagset));
    }
    return out;
  };

  json report = json::array();
  for (const auto& m : metrics) {
    if (m == "ser" || m == "exact") {
      need(!refs.empty(), m + " needs --ref");
      const double ser = SentenceErrorRate<Sentence>(hyps, refs[0]);
      report.push_back({{"metric", m},
                        {"value", m == "ser" ? ser : 1.0 - ser},
                        {"sentences", hyps.size()}});
    } else if (m == "sari") {
      need(!refs.empty() && !srcs.empty(), "sari needs --src and --ref");
      std::vector<std::vector<Sentence>> ref_sets(hyps.size());
      for (std::size_t i = 0; i < hyps.size(); ++i) {
        for (const auto& r : refs) ref_sets[i].push_back(r[i]);
      }
      report.push_back({{"metric", m},
                        {"value", Sari(srcs, hyps, ref_sets)},
                        {"sentences", hyps.size()},
                        {"references", refs.size()}});
    } else if (m == "span_prf") {
      const auto h = edits_for(hyp_records, &hyps, "hyp");
      const auto g =
          edits_for(gold_records, refs.empty() ? nullptr : &refs[0], "gold");
      report.push_back(PrfJson(m, CorpusSpanPrf(h, g, a.beta), a.beta));
    } else {
      need(!hyp_records.empty() && !gold_records.empty(),
           "tagging_prf needs --hyp-edits and --gold");
      const auto h = edits_for(hyp_records, nullptr, "hyp");
      const auto g = edits_for(gold_records, nullptr, "gold");
      json row = PrfJson(m, CorpusTaggingPrf(h, g, a.beta, a.project_spans),
                         a.beta);
      row["project_spans"] = a.project_spans;
      report.push_back(row);
    }
  }

  if (a.json_out == "-") {
    s.out << report.dump(2) << '\n';
    return kExitOk;
  }
  if (!a.json_out.empty()) {
    Sink sink(a.json_out, s.out);
    sink.get() << report.dump(2) << '\n';
  }
  for (const auto& row : report) {
    char line[160];
    std::snprintf(line, sizeof(line), "%-12s %10.6f",
                  row["metric"].get<std::string>().c_str(),
                  row["value"].get<double>());
    s.out << line;
    if (row.contains("precision")) {
      std::snprintf(line, sizeof(line), "  P=%.6f R=%.6f (tp=%ld hyp=%ld gold=%ld)",
                    row["precision"].get<double>(), row["recall"].get<double>(),
                    row["true_positives"].get<long>(),
                    row["hyp_count"].get<long>(), row["gold_count"].get<long>());
      s.out << line;
    }
    s.out << '\n';
  }
  return kExitOk;
}

// ---- bench ----

struct BenchArgs {
  std::string edit_checkpoint, fullseq_checkpoint, input, json_out,
      buckets = "3,6,10";
  int repetitions = 3;
  DecodeFlags flags;
};

int Bench(const BenchArgs& a, const std::string& config_path, Streams s) {
  const DecodeParams params = a.flags.Resolve(config_path, s.in);
  const std::vector<BenchBucket> buckets = [&] {
    try {
      return BucketsFromEdges(a.buckets);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }();
  if (a.repetitions < 1) throw UsageError("--repetitions must be >= 1");
  const Checkpoint edit = LoadCheckpoint(a.edit_checkpoint);
  const Checkpoint full = LoadCheckpoint(a.fullseq_checkpoint);
  if (!(edit.vocabulary == full.vocabulary)) {
    throw DataError("the two checkpoints use different vocabularies");
  }
  const std::vector<TsvPair> pairs = ReadTsv(a.input, s.in);
  std::vector<BenchItem> items;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    try {
      const SourceSequence src(
          edit.vocabulary.Encode(Tokenize(pairs[i].source, edit.tokenize)));
      const TargetSequence tgt{
          edit.vocabulary.Encode(Tokenize(pairs[i].target, edit.tokenize))};
      const EditSequence gold = AnchorLeadingInsertions(
          src, ExtractEdits(src, tgt, std::nullopt, edit.tagset));
      items.push_back({src, static_cast<int>(gold.ops.size()) - 1,
                       tgt.length()});
    } catch (const DataError& e) {
      throw DataError("line " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  const BenchReport report =
      RunBench(edit.model, full.model, items, buckets, params, a.repetitions);
  for (const auto& w : report.warnings) s.err << "warning: " << w << '\n';
  report.PrintTable(s.out);
  if (!a.json_out.empty()) {
    Sink sink(a.json_out, s.out);
    sink.get() << report.ToJson() << '\n';
  }
  return kExitOk;
}

}  // namespace

int Run(int argc, const char* const* argv, std::istream& in, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Span-based edit-operation transduction toolkit", "spanedit"};
  app.require_subcommand(1);
  app.fallthrough();
  std::uint64_t seed = 0;
  std::string config_path;
  app.add_option("--seed", seed, "Random seed (default 0)");
  app.add_option("--config", config_path,
                 "JSON config: decode parameters for decode/bench; "
                 "{model, optimizer, steps} for train");

  ExtractArgs ex;
  auto* extract = app.add_subcommand("extract", "Parallel TSV to edit JSONL");
  extract->add_option("--input", ex.input, "TSV: source, target[, tags]")
      ->required();
  extract->add_option("--output", ex.output, "Edit file (default stdout)");
  extract->add_option("--tagset", ex.tagset, "Tag set name or file");
  extract->add_option("--tokenize", ex.tokenize, "whitespace or character");

  ApplyArgs ap;
  auto* apply = app.add_subcommand("apply", "Apply edit JSONL, print targets");
  apply->add_option("--edits", ap.edits, "Edit file ('-' for stdin)")
      ->required();
  apply->add_option("--src", ap.src, "Source lines to check against");
  apply->add_option("--output", ap.output, "Target file (default stdout)");
  apply->add_option("--tokenize", ap.tokenize, "whitespace or character");

  TrainArgs tr;
  auto* train = app.add_subcommand("train", "Train a model");
  train->add_option("--input", tr.input, "TSV corpus or .jsonl edit file")
      ->required();
  train->add_option("--checkpoint", tr.checkpoint, "Checkpoint to write")
      ->required();
  train->add_option("--loss-csv", tr.loss_csv,
                    "Loss curve (default <checkpoint>.loss.csv)");
  train->add_option("--tagset", tr.tagset, "Tag set name or file");
  train->add_option("--tokenize", tr.tokenize, "whitespace or character");
  train->add_option("--mode", tr.mode, "edit or fullseq (default edit)");
  tr.steps_opt = train->add_option("--steps", tr.steps, "Updates (default 1000)");
  tr.batch_opt = train->add_option("--batch-size", tr.batch_size,
                                   "Batch size (default 8)");
  tr.lr_opt = train->add_option("--learning-rate", tr.learning_rate,
                                "Adam step size (default 1e-3)");
  train->add_option("--log-every", tr.log_every, "Progress interval");

  DecodeArgs de;
  auto* decode = app.add_subcommand("decode", "Decode sources");
  decode->add_option("--checkpoint", de.checkpoint, "Checkpoint")->required();
  decode->add_option("--input", de.input, "Source lines")->required();
  decode->add_option("--output", de.output, "Outputs (default stdout)");
  decode->add_option("--nbest", de.nbest, "N-best JSON lines");
  decode->add_option("--mode", de.mode, "Expected model mode");
  decode->add_flag("--greedy", de.greedy, "Greedy search");
  decode->add_flag("--oracle-tags", de.oracle_tags, "Force gold tags");
  decode->add_flag("--oracle-spans", de.oracle_spans, "Force gold spans");
  decode->add_flag("--allow-repeat", de.allow_repeat,
                   "Allow reusing the current gold label");
  decode->add_option("--gold", de.gold, "Gold edit file for oracle decoding");
  de.flags.Register(decode);

  ScoreArgs sc;
  auto* score = app.add_subcommand("score", "Evaluate outputs");
  score->add_option("--hyp", sc.hyp, "Hypothesis lines")->required();
  score->add_option("--ref", sc.refs, "Reference lines (repeatable)");
  score->add_option("--src", sc.src, "Source lines");
  score->add_option("--gold", sc.gold, "Gold edit file");
  score->add_option("--hyp-edits", sc.hyp_edits, "Hypothesis edit file");
  score->add_option("--metrics", sc.metrics,
                    "Comma list of ser, exact, sari, span_prf, tagging_prf");
  score->add_option("--beta", sc.beta, "F-beta weight (default 0.5)");
  score->add_flag("--project-spans", sc.project_spans,
                  "Project hypothesis spans onto gold spans for tagging_prf");
  score->add_option("--tagset", sc.tagset, "Tag set name or file");
  score->add_option("--tokenize", sc.tokenize, "whitespace or character");
  score->add_option("--json", sc.json_out, "JSON report ('-' for stdout)");

  BenchArgs be;
  auto* bench = app.add_subcommand("bench", "Decode speed benchmark");
  bench->add_option("--edit-checkpoint", be.edit_checkpoint, "Edit model")
      ->required();
  bench->add_option("--fullseq-checkpoint", be.fullseq_checkpoint,
                    "Full-sequence model")
      ->required();
  bench->add_option("--input", be.input, "TSV corpus")->required();
  bench->add_option("--buckets", be.buckets, "Edit-count edges (default 3,6,10)");
  bench->add_option("--repetitions", be.repetitions, "Timing runs (default 3)");
  bench->add_option("--json", be.json_out, "JSON report");
  be.flags.Register(bench);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  const Streams s{in, out, err};
  try {
    if (*extract) return Extract(ex, s);
    if (*apply) return Apply(ap, s);
    if (*train) return Train(tr, config_path, seed, s);
    if (*decode) return DecodeCmd(de, config_path, s);
    if (*score) return Score(sc, s);
    if (*bench) return Bench(be, config_path, s);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const SearchError& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace spanedit::cli
