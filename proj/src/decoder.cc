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

#include "spanedit/decoder.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <numeric>

#include "json.hpp"
#include "spanedit/editops.h"

namespace spanedit {

using autodiff::Matrix;
using autodiff::RowVector;

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double LogPenalty(double penalty) {
  return penalty == 0 ? kNegInf : std::log(penalty);
}

// Ranking score of a complete output.
double FinalScore(double raw, int length, bool identity,
                  const DecodeParams& params) {
  double score = raw;
  if (params.length_norm_alpha > 0) {
    score /= LengthPenalty(length, params.length_norm_alpha);
  }
  if (identity) score += LogPenalty(params.identity_penalty);
  return score;
}

// Best completion score any extension of `raw` could still reach.
double UpperBound(double raw, int max_length, const DecodeParams& params) {
  double bound = raw;
  if (params.length_norm_alpha > 0) {
    bound /= LengthPenalty(max_length, params.length_norm_alpha);
  }
  return bound + std::max(0.0, LogPenalty(params.identity_penalty));
}

struct Choice {
  int id;
  double logp;
};

// The k best (logp desc, id asc) entries of `choices`.
std::vector<Choice> TopK(std::vector<Choice> choices, int k) {
  auto better = [](const Choice& a, const Choice& b) {
    return a.logp > b.logp || (a.logp == b.logp && a.id < b.id);
  };
  const auto n = std::min<std::size_t>(k, choices.size());
  std::partial_sort(choices.begin(), choices.begin() + n, choices.end(),
                    better);
  choices.resize(n);
  return choices;
}

// Generic pruned beam loop. `State` must provide `score` (raw), `final`
// (ranking score once finished) and `done`.
template <typename State>
struct BeamResult {
  std::vector<State> finished;
  std::optional<State> best_alive;
};

template <typename State, typename Expand, typename Bound>
BeamResult<State> RunBeam(State start, int beam_size, int max_rounds,
                          Expand expand, Bound bound, DecodeStats* stats) {
  std::vector<State> beam = {std::move(start)};
  std::vector<State> finished;
  BeamResult<State> result;
  for (int round = 0; round < max_rounds && !beam.empty(); ++round) {
    if (stats != nullptr) ++stats->rounds;
    std::vector<State> children;
    for (const State& s : beam) expand(s, children);

    std::vector<std::size_t> order(children.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) {
                       return children[a].score > children[b].score;
                     });
    std::vector<State> next;
    for (std::size_t idx : order) {
      if (static_cast<int>(next.size()) == beam_size) break;
      State& child = children[idx];
      if (child.done) {
        finished.push_back(std::move(child));
      } else {
        next.push_back(std::move(child));
      }
    }
    beam = std::move(next);
    if (!beam.empty()) result.best_alive = beam.front();

    std::stable_sort(finished.begin(), finished.end(),
                     [](const State& a, const State& b) {
                       return a.final > b.final;
                     });
    if (static_cast<int>(finished.size()) > beam_size) {
      finished.resize(beam_size);
    }
    if (static_cast<int>(finished.size()) == beam_size) {
      const double worst = finished.back().final;
      bool can_improve = false;
      for (const State& s : beam) can_improve |= bound(s) > worst;
      if (!can_improve) break;
    }
  }
  result.finished = std::move(finished);
  return result;
}

// ---------------------------------------------------------------------------
// Edit-mode search

enum class Phase { kTag, kSpan, kReplacement };

struct EditState {
  std::vector<EditOp> ops;
  std::vector<StepFeedback> history = {StartFeedback()};
  std::shared_ptr<const Matrix> a_states;  // rows for the op in progress
  Phase phase = Phase::kTag;
  TagId tag = kSelfTag;
  int span = 0;
  double score = 0;
  double final = 0;
  bool done = false;
  std::size_t tag_index = 0;   // oracle labels consumed
  std::size_t span_index = 0;

  int prev_span() const { return ops.empty() ? 0 : ops.back().span_end; }
};

// Candidate labels under an oracle sequence: the next unconsumed label and,
// when repeating is allowed, the last consumed one.
std::vector<int> OracleCandidates(const std::vector<int>& labels,
                                  std::size_t index, bool allow_repeat) {
  std::vector<int> out;
  if (index < labels.size()) out.push_back(labels[index]);
  if (allow_repeat && index > 0 &&
      (out.empty() || out.front() != labels[index - 1])) {
    out.push_back(labels[index - 1]);
  }
  return out;
}

std::size_t Advance(const std::vector<int>& labels, std::size_t index,
                    int chosen) {
  return index < labels.size() && labels[index] == chosen ? index + 1 : index;
}

class EditSearch {
 public:
  EditSearch(const EditModel& model, const SourceSequence& src,
             const DecodeParams& params, const OracleConstraint* constraint,
             DecodeStats* stats)
      : model_(model),
        src_(src),
        params_(params),
        stats_(stats),
        enc_(model.Encode(src)),
        length_(src.length()),
        vocab_(model.config().vocab_size),
        tags_(model.config().tagset_size) {
    if (constraint != nullptr) {
      allow_repeat_ = constraint->allow_repeat;
      if (constraint->tags) {
        oracle_tags_ = std::vector<int>(constraint->tags->begin(),
                                        constraint->tags->end());
      }
      if (constraint->spans) oracle_spans_ = *constraint->spans;
    }
    if (oracle_tags_) {
      selfs_after_.assign(oracle_tags_->size() + 1, 0);
      for (std::size_t i = oracle_tags_->size(); i-- > 0;) {
        selfs_after_[i] =
            selfs_after_[i + 1] + ((*oracle_tags_)[i] == kSelfTag ? 1 : 0);
      }
    }
  }

  std::vector<Hypothesis> Run() {
    const int max_rounds = params_.EffectiveMaxSteps(length_);
    auto expand = [this](const EditState& s, std::vector<EditState>& out) {
      Expand(s, out);
    };
    auto bound = [&](const EditState& s) {
      return UpperBound(s.score, max_rounds, params_);
    };
    auto result = RunBeam<EditState>(EditState{}, params_.beam_size, max_rounds,
                                     expand, bound, stats_);
    if (result.finished.empty()) {
      EditSequence partial{result.best_alive ? result.best_alive->ops
                                             : std::vector<EditOp>{},
                           length_};
      throw SearchError(oracle_tags_ || oracle_spans_
                            ? "oracle reference exhausted before EOS"
                            : "no hypothesis finished within " +
                                  std::to_string(max_rounds) + " sub-steps",
                        std::move(partial));
    }
    std::vector<Hypothesis> out;
    for (const EditState& s : result.finished) out.push_back(ToHypothesis(s));
    return out;
  }

 private:
  // Feasible span ends for `tag` after the previous op. Under an oracle
  // tag sequence, room is left for one source token per SELF label still
  // ahead; `tag_index` is the index after consuming `tag`.
  std::vector<int> SpanRange(const EditState& s, TagId tag,
                             std::size_t tag_index) const {
    std::vector<int> spans;
    if (tag == kEosTag) {
      spans.push_back(length_);
    } else {
      const int lo = tag == kSelfTag ? s.prev_span() + 1
                                     : std::max(s.prev_span(), 1);
      int hi = length_;
      if (oracle_tags_) hi -= selfs_after_[tag_index];
      for (int p = lo; p <= hi; ++p) spans.push_back(p);
    }
    if (oracle_spans_) {
      const auto allowed =
          OracleCandidates(*oracle_spans_, s.span_index, allow_repeat_);
      std::erase_if(spans, [&](int p) {
        return std::find(allowed.begin(), allowed.end(), p) == allowed.end();
      });
    }
    return spans;
  }

  void Expand(const EditState& s, std::vector<EditState>& out) {
    switch (s.phase) {
      case Phase::kTag:
        ExpandTag(s, out);
        break;
      case Phase::kSpan:
        ExpandSpan(s, out);
        break;
      case Phase::kReplacement:
        ExpandReplacement(s, out);
        break;
    }
  }

  void ExpandTag(const EditState& s, std::vector<EditState>& out) {
    if (static_cast<int>(s.history.size()) > model_.config().max_positions) {
      return;
    }
    std::vector<int> allowed_tags;
    if (oracle_tags_) {
      allowed_tags = OracleCandidates(*oracle_tags_, s.tag_index, allow_repeat_);
      if (allowed_tags.empty()) return;
    }
    auto a_states = std::make_shared<const Matrix>(
        model_.DecoderAStates(enc_, s.history));
    if (stats_ != nullptr) ++stats_->tag_evaluations;
    const RowVector lp = model_.TagLogProbs(a_states->row(a_states->rows() - 1));

    std::vector<Choice> feasible;
    for (TagId t = 0; t < tags_; ++t) {
      if (oracle_tags_ && std::find(allowed_tags.begin(), allowed_tags.end(),
                                    t) == allowed_tags.end()) {
        continue;
      }
      const std::size_t next_index =
          oracle_tags_ ? Advance(*oracle_tags_, s.tag_index, t) : 0;
      if (SpanRange(s, t, next_index).empty()) continue;
      feasible.push_back({t, lp(t)});
    }
    for (const Choice& c : TopK(std::move(feasible), params_.beam_size)) {
      EditState child = s;
      child.a_states = a_states;
      child.tag = c.id;
      child.score += params_.lambda_tag * c.logp;
      if (oracle_tags_) {
        child.tag_index = Advance(*oracle_tags_, s.tag_index, c.id);
      }
      if (params_.shortcuts && c.id == kEosTag) {
        child.span = length_;
        if (oracle_spans_) {
          child.span_index = Advance(*oracle_spans_, s.span_index, length_);
        }
        Commit(child, kEosId);
      } else {
        child.phase = Phase::kSpan;
      }
      out.push_back(std::move(child));
    }
  }

  void ExpandSpan(const EditState& s, std::vector<EditState>& out) {
    const std::vector<int> range = SpanRange(s, s.tag, s.tag_index);
    if (range.empty()) return;
    if (stats_ != nullptr) ++stats_->span_evaluations;
    const RowVector lp = model_.SpanLogProbs(
        s.a_states->row(s.a_states->rows() - 1), s.tag, enc_);
    std::vector<Choice> feasible;
    for (int p : range) feasible.push_back({p, lp(p - 1)});
    for (const Choice& c : TopK(std::move(feasible), 2 * params_.beam_size)) {
      EditState child = s;
      child.span = c.id;
      child.score += params_.lambda_span * c.logp;
      if (oracle_spans_) {
        child.span_index = Advance(*oracle_spans_, s.span_index, c.id);
      }
      if (params_.shortcuts && s.tag == kSelfTag) {
        Commit(child, kSelfReplacement);
      } else {
        child.phase = Phase::kReplacement;
      }
      out.push_back(std::move(child));
    }
  }

  void ExpandReplacement(const EditState& s, std::vector<EditState>& out) {
    if (stats_ != nullptr) ++stats_->replacement_evaluations;
    const RowVector lp =
        model_.ReplacementLogProbs(enc_, *s.a_states, s.tag, s.span);
    std::vector<Choice> feasible;
    if (s.tag == kSelfTag) {
      feasible.push_back({vocab_, lp(vocab_)});
    } else if (s.tag == kEosTag) {
      feasible.push_back({kEosId, lp(kEosId)});
    } else {
      for (int c = 0; c < vocab_; ++c) {
        if (c == kPadId || c == kEosId) continue;
        feasible.push_back({c, lp(c)});
      }
    }
    for (const Choice& c : TopK(std::move(feasible), params_.beam_size)) {
      EditState child = s;
      child.score += params_.lambda_replacement * c.logp;
      Commit(child, ReplacementFromClass(c.id, vocab_));
      out.push_back(std::move(child));
    }
  }

  // Appends the op (tag, span, replacement) and moves to the next op.
  void Commit(EditState& s, TokenId replacement) const {
    const EditOp op{s.tag, s.span, replacement};
    s.ops.push_back(op);
    s.a_states.reset();
    s.phase = Phase::kTag;
    if (op.is_eos()) {
      s.done = true;
      const EditSequence edits{s.ops, length_};
      const bool identity = ApplyEdits(src_, edits).tokens == src_.tokens();
      s.final = FinalScore(s.score, static_cast<int>(s.ops.size()), identity,
                           params_);
    } else {
      s.history.push_back(FeedbackAfter(op));
    }
  }

  Hypothesis ToHypothesis(const EditState& s) const {
    Hypothesis h;
    h.edits = {s.ops, length_};
    const ValidationReport report = Validate(h.edits, length_);
    if (!report.valid()) {
      throw std::logic_error("decoder produced invalid edits: " +
                             report.ToString());
    }
    h.output = ApplyEdits(src_, h.edits);
    h.source = src_.tokens();
    h.raw_score = s.score;
    h.score = s.final;
    h.identity = h.output.tokens == src_.tokens();
    return h;
  }

  const EditModel& model_;
  const SourceSequence& src_;
  const DecodeParams& params_;
  DecodeStats* stats_;
  EncodedSource enc_;
  int length_;
  int vocab_;
  int tags_;
  bool allow_repeat_ = false;
  std::optional<std::vector<int>> oracle_tags_;
  std::optional<std::vector<int>> oracle_spans_;
  std::vector<int> selfs_after_;  // SELF labels in oracle tags [i, end)
};

void RequireMode(const EditModel& model, ModelMode mode, const char* what) {
  if (model.config().mode != mode) {
    throw std::logic_error(std::string(what) + " needs a " + ModeName(mode) +
                           " model");
  }
}

// ---------------------------------------------------------------------------
// Full-sequence search

struct TokenState {
  std::vector<TokenId> tokens;
  double score = 0;
  double final = 0;
  bool done = false;
};

int ArgMax(const std::vector<Choice>& choices) {
  return TopK(choices, 1).front().id;
}

}  // namespace

// ---------------------------------------------------------------------------

void DecodeParams::Validate() const {
  if (beam_size < 1) throw std::invalid_argument("beam_size must be >= 1");
  if (lambda_tag < 0 || lambda_span < 0 || lambda_replacement < 0) {
    throw std::invalid_argument("lambda weights must be non-negative");
  }
  if (length_norm_alpha < 0) {
    throw std::invalid_argument("length_norm_alpha must be >= 0");
  }
  if (identity_penalty < 0) {
    throw std::invalid_argument("identity_penalty must be >= 0");
  }
  if (refinement_passes < 1) {
    throw std::invalid_argument("refinement_passes must be >= 1");
  }
  if (max_steps < 0) throw std::invalid_argument("max_steps must be >= 0");
}

int DecodeParams::EffectiveMaxSteps(int source_len) const {
  const int floor = 3 * (source_len + 2);
  if (max_steps == 0) return 2 * floor;
  if (max_steps < floor) {
    throw std::invalid_argument("max_steps " + std::to_string(max_steps) +
                                " is below 3 * (I + 2) = " +
                                std::to_string(floor));
  }
  return max_steps;
}

std::string DecodeParams::ToJson() const {
  nlohmann::json j = {{"beam_size", beam_size},
                      {"lambda_tag", lambda_tag},
                      {"lambda_span", lambda_span},
                      {"lambda_replacement", lambda_replacement},
                      {"length_norm_alpha", length_norm_alpha},
                      {"identity_penalty", identity_penalty},
                      {"refinement_passes", refinement_passes},
                      {"shortcuts", shortcuts},
                      {"max_steps", max_steps}};
  return j.dump(2);
}

DecodeParams DecodeParams::FromJson(const std::string& json_text,
                                    const DecodeParams& base) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(std::string("malformed decode config: ") + e.what());
  }
  if (!j.is_object()) throw DataError("decode config must be a JSON object");
  DecodeParams p = base;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "beam_size") {
        p.beam_size = value.get<int>();
      } else if (key == "lambda_tag") {
        p.lambda_tag = value.get<double>();
      } else if (key == "lambda_span") {
        p.lambda_span = value.get<double>();
      } else if (key == "lambda_replacement") {
        p.lambda_replacement = value.get<double>();
      } else if (key == "length_norm_alpha") {
        p.length_norm_alpha = value.get<double>();
      } else if (key == "identity_penalty") {
        p.identity_penalty = value.get<double>();
      } else if (key == "refinement_passes") {
        p.refinement_passes = value.get<int>();
      } else if (key == "shortcuts") {
        p.shortcuts = value.get<bool>();
      } else if (key == "max_steps") {
        p.max_steps = value.get<int>();
      } else {
        throw DataError("unknown decode config field '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad decode config: ") + e.what());
  }
  return p;
}

DecodeParams DecodeParams::FromJson(const std::string& json_text) {
  return FromJson(json_text, DecodeParams{});
}

double LengthPenalty(int length, double alpha) {
  return std::pow((5.0 + length) / 6.0, alpha);
}

DecodeStats& DecodeStats::operator+=(const DecodeStats& o) {
  rounds += o.rounds;
  tag_evaluations += o.tag_evaluations;
  span_evaluations += o.span_evaluations;
  replacement_evaluations += o.replacement_evaluations;
  token_evaluations += o.token_evaluations;
  passes += o.passes;
  return *this;
}

OracleConstraint OracleConstraint::FromEdits(const EditSequence& gold,
                                             bool use_tags, bool use_spans,
                                             bool allow_repeat) {
  OracleConstraint c;
  c.allow_repeat = allow_repeat;
  if (use_tags) {
    c.tags.emplace();
    for (const auto& op : gold.ops) c.tags->push_back(op.tag);
  }
  if (use_spans) {
    c.spans.emplace();
    for (const auto& op : gold.ops) c.spans->push_back(op.span_end);
  }
  return c;
}

std::vector<Hypothesis> BeamDecode(const EditModel& model,
                                   const SourceSequence& src,
                                   const DecodeParams& params,
                                   DecodeStats* stats) {
  RequireMode(model, ModelMode::kEdit, "BeamDecode");
  params.Validate();
  if (stats != nullptr) ++stats->passes;
  return EditSearch(model, src, params, nullptr, stats).Run();
}

std::vector<Hypothesis> ConstrainedDecode(const EditModel& model,
                                          const SourceSequence& src,
                                          const DecodeParams& params,
                                          const OracleConstraint& constraint,
                                          DecodeStats* stats) {
  RequireMode(model, ModelMode::kEdit, "ConstrainedDecode");
  params.Validate();
  const bool has_tags = constraint.tags && !constraint.tags->empty();
  const bool has_spans = constraint.spans && !constraint.spans->empty();
  if (!has_tags && !has_spans) {
    throw std::invalid_argument(
        "oracle constraint needs a non-empty tag or span sequence");
  }
  OracleConstraint used = constraint;
  if (!has_tags) used.tags.reset();
  if (!has_spans) used.spans.reset();
  if (stats != nullptr) ++stats->passes;
  return EditSearch(model, src, params, &used, stats).Run();
}

std::vector<Hypothesis> IterativeRefine(const EditModel& model,
                                        const SourceSequence& src,
                                        const DecodeParams& params,
                                        DecodeStats* stats) {
  std::vector<Hypothesis> current = BeamDecode(model, src, params, stats);
  for (int pass = 2; pass <= params.refinement_passes; ++pass) {
    std::vector<Hypothesis> pool;
    std::map<std::vector<TokenId>, std::size_t> by_text;
    auto offer = [&](Hypothesis h) {
      auto [it, inserted] = by_text.emplace(h.output.tokens, pool.size());
      if (inserted) {
        pool.push_back(std::move(h));
      } else if (h.score > pool[it->second].score) {
        pool[it->second] = std::move(h);
      }
    };
    for (const Hypothesis& parent : current) {
      const int len = parent.output.length();
      if (len == 0 || len > model.config().max_positions) {
        // Cannot serve as a source; carried forward as an identity pass.
        Hypothesis carried = parent;
        carried.source = parent.output.tokens;
        carried.edits = {};
        carried.identity = true;
        carried.score += LogPenalty(params.identity_penalty);
        offer(std::move(carried));
        continue;
      }
      std::vector<Hypothesis> children;
      try {
        children = BeamDecode(model, SourceSequence(parent.output.tokens),
                              params, stats);
      } catch (const SearchError&) {
        children.clear();
      }
      if (children.empty()) {
        Hypothesis carried = parent;
        carried.source = parent.output.tokens;
        carried.edits = {};
        carried.identity = true;
        carried.score += LogPenalty(params.identity_penalty);
        offer(std::move(carried));
        continue;
      }
      for (Hypothesis child : children) {
        child.raw_score += parent.raw_score;
        child.score += parent.score;
        offer(std::move(child));
      }
    }
    std::stable_sort(pool.begin(), pool.end(),
                     [](const Hypothesis& a, const Hypothesis& b) {
                       return a.score > b.score;
                     });
    if (static_cast<int>(pool.size()) > params.beam_size) {
      pool.resize(params.beam_size);
    }
    current = std::move(pool);
  }
  return current;
}

Hypothesis GreedyDecode(const EditModel& model, const SourceSequence& src,
                        const DecodeParams& params, DecodeStats* stats) {
  params.Validate();
  if (stats != nullptr) ++stats->passes;
  const EncodedSource enc = model.Encode(src);
  const int length = src.length();
  const int cap = params.EffectiveMaxSteps(length);
  Hypothesis h;
  h.source = src.tokens();

  if (model.config().mode == ModelMode::kFullSequence) {
    const int vocab = model.config().vocab_size;
    std::vector<TokenId> tokens;
    for (int step = 0;; ++step) {
      if (step == cap ||
          static_cast<int>(tokens.size()) + 1 > model.config().max_positions) {
        throw SearchError("greedy search did not finish", {});
      }
      const RowVector lp = model.FullSequenceLogProbs(enc, tokens);
      if (stats != nullptr) ++stats->token_evaluations, ++stats->rounds;
      std::vector<Choice> feasible;
      for (int c = 0; c < vocab; ++c) {
        if (c != kPadId && c != kDelId) feasible.push_back({c, lp(c)});
      }
      const int best = ArgMax(feasible);
      h.raw_score += lp(best);
      if (best == kEosId) break;
      tokens.push_back(best);
    }
    h.output.tokens = std::move(tokens);
    h.identity = h.output.tokens == src.tokens();
    h.score = FinalScore(h.raw_score, h.output.length(), h.identity, params);
    return h;
  }

  const int vocab = model.config().vocab_size;
  const int tags = model.config().tagset_size;
  std::vector<StepFeedback> history = {StartFeedback()};
  std::vector<EditOp> ops;
  int sub_steps = 0;
  auto tick = [&] {
    if (++sub_steps > cap) {
      throw SearchError("greedy search did not finish", {ops, length});
    }
    if (stats != nullptr) ++stats->rounds;
  };
  while (ops.empty() || !ops.back().is_eos()) {
    if (static_cast<int>(history.size()) > model.config().max_positions) {
      throw SearchError("greedy search exceeded max_positions", {ops, length});
    }
    const int prev = ops.empty() ? 0 : ops.back().span_end;
    tick();
    const Matrix a = model.DecoderAStates(enc, history);
    if (stats != nullptr) ++stats->tag_evaluations;
    const RowVector tag_lp = model.TagLogProbs(a.row(a.rows() - 1));
    std::vector<Choice> tag_choices;
    for (TagId t = 0; t < tags; ++t) {
      if (t == kSelfTag && prev == length) continue;
      tag_choices.push_back({t, tag_lp(t)});
    }
    const TagId tag = ArgMax(tag_choices);
    h.raw_score += params.lambda_tag * tag_lp(tag);

    EditOp op{tag, length, kEosId};
    if (!(params.shortcuts && tag == kEosTag)) {
      tick();
      const RowVector span_lp =
          model.SpanLogProbs(a.row(a.rows() - 1), tag, enc);
      if (stats != nullptr) ++stats->span_evaluations;
      std::vector<Choice> span_choices;
      if (tag == kEosTag) {
        span_choices.push_back({length, span_lp(length - 1)});
      } else {
        const int lo = tag == kSelfTag ? prev + 1 : std::max(prev, 1);
        for (int p = lo; p <= length; ++p) {
          span_choices.push_back({p, span_lp(p - 1)});
        }
      }
      op.span_end = ArgMax(span_choices);
      h.raw_score += params.lambda_span * span_lp(op.span_end - 1);

      if (params.shortcuts && tag == kSelfTag) {
        op.replacement = kSelfReplacement;
      } else {
        tick();
        const RowVector repl_lp =
            model.ReplacementLogProbs(enc, a, tag, op.span_end);
        if (stats != nullptr) ++stats->replacement_evaluations;
        std::vector<Choice> repl_choices;
        if (tag == kSelfTag) {
          repl_choices.push_back({vocab, repl_lp(vocab)});
        } else if (tag == kEosTag) {
          repl_choices.push_back({kEosId, repl_lp(kEosId)});
        } else {
          for (int c = 0; c < vocab; ++c) {
            if (c != kPadId && c != kEosId) {
              repl_choices.push_back({c, repl_lp(c)});
            }
          }
        }
        const int cls = ArgMax(repl_choices);
        h.raw_score += params.lambda_replacement * repl_lp(cls);
        op.replacement = ReplacementFromClass(cls, vocab);
      }
    }
    ops.push_back(op);
    history.push_back(FeedbackAfter(op));
  }
  h.edits = {std::move(ops), length};
  h.output = ApplyEdits(src, h.edits);
  h.identity = h.output.tokens == src.tokens();
  h.score = FinalScore(h.raw_score, static_cast<int>(h.edits.ops.size()),
                       h.identity, params);
  return h;
}

double ScoreEdits(const EditModel& model, const SourceSequence& src,
                  const EditSequence& edits, const DecodeParams& params) {
  const auto steps = model.TeacherForcedLogProbs(src, edits);
  double score = 0;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const EditOp& op = edits.ops[i];
    score += params.lambda_tag * steps[i].tag;
    if (params.shortcuts && op.is_eos()) continue;
    score += params.lambda_span * steps[i].span;
    if (params.shortcuts && op.is_self()) continue;
    score += params.lambda_replacement * steps[i].replacement;
  }
  return score;
}

std::vector<Hypothesis> FullSequenceDecode(const EditModel& model,
                                           const SourceSequence& src,
                                           const DecodeParams& params,
                                           DecodeStats* stats) {
  RequireMode(model, ModelMode::kFullSequence, "FullSequenceDecode");
  params.Validate();
  if (stats != nullptr) ++stats->passes;
  const EncodedSource enc = model.Encode(src);
  const int vocab = model.config().vocab_size;
  const int max_rounds =
      std::min(params.EffectiveMaxSteps(src.length()),
               model.config().max_positions);
  auto expand = [&](const TokenState& s, std::vector<TokenState>& out) {
    const RowVector lp = model.FullSequenceLogProbs(enc, s.tokens);
    if (stats != nullptr) ++stats->token_evaluations;
    std::vector<Choice> feasible;
    for (int c = 0; c < vocab; ++c) {
      if (c != kPadId && c != kDelId) feasible.push_back({c, lp(c)});
    }
    for (const Choice& c : TopK(std::move(feasible), params.beam_size)) {
      TokenState child = s;
      child.score += c.logp;
      if (c.id == kEosId) {
        child.done = true;
        child.final =
            FinalScore(child.score, static_cast<int>(child.tokens.size()),
                       child.tokens == src.tokens(), params);
      } else {
        child.tokens.push_back(c.id);
      }
      out.push_back(std::move(child));
    }
  };
  auto bound = [&](const TokenState& s) {
    return UpperBound(s.score, max_rounds, params);
  };
  auto result = RunBeam<TokenState>(TokenState{}, params.beam_size, max_rounds,
                                    expand, bound, stats);
  if (result.finished.empty()) {
    throw SearchError("no hypothesis finished within " +
                          std::to_string(max_rounds) + " steps",
                      {});
  }
  std::vector<Hypothesis> out;
  for (const TokenState& s : result.finished) {
    Hypothesis h;
    h.output.tokens = s.tokens;
    h.source = src.tokens();
    h.raw_score = s.score;
    h.score = s.final;
    h.identity = s.tokens == src.tokens();
    out.push_back(std::move(h));
  }
  return out;
}

std::vector<Hypothesis> Decode(const EditModel& model,
                               const SourceSequence& src,
                               const DecodeParams& params, DecodeStats* stats) {
  if (model.config().mode == ModelMode::kFullSequence) {
    return FullSequenceDecode(model, src, params, stats);
  }
  if (params.refinement_passes > 1) {
    return IterativeRefine(model, src, params, stats);
  }
  return BeamDecode(model, src, params, stats);
}

LambdaSearchResult GridSearchLambdas(
    const DecodeParams& base,
    const std::function<double(const DecodeParams&)>& objective) {
  static constexpr double kGrid[] = {0.5, 0.75, 1.0, 1.25, 1.5};
  LambdaSearchResult result;
  result.best = base;
  bool first = true;
  for (double t : kGrid) {
    for (double p : kGrid) {
      for (double r : kGrid) {
        DecodeParams candidate = base;
        candidate.lambda_tag = t;
        candidate.lambda_span = p;
        candidate.lambda_replacement = r;
        const double value = objective(candidate);
        ++result.evaluations;
        if (first || value > result.best_objective) {
          result.best = candidate;
          result.best_objective = value;
          first = false;
        }
      }
    }
  }
  return result;
}

}  // namespace spanedit
