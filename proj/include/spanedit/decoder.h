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

// Search over edit sequences.
//
// An edit op is produced in up to three sub-steps (tag, span end,
// replacement), each scored with a weighted model log-probability:
//
//   score = sum_n  lt * log P(t_n) + lp * log P(p_n) + lr * log P(r_n)
//
// The beam is pruned after every sub-step. Structural rules keep every
// hypothesis valid: span ends never decrease, a SELF op covers at least one
// source token and copies it, EOS ends at I and emits EOS, and other tags
// emit an ordinary token or DEL. Forced choices still cost their model
// log-probability unless shortcuts are on.

#ifndef SPANEDIT_DECODER_H_
#define SPANEDIT_DECODER_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "spanedit/core.h"
#include "spanedit/model.h"

namespace spanedit {

struct DecodeParams {
  int beam_size = 4;
  double lambda_tag = 1.0;
  double lambda_span = 1.0;
  double lambda_replacement = 1.0;
  double length_norm_alpha = 0.0;  // 0 disables
  double identity_penalty = 1.0;   // 1 disables
  int refinement_passes = 1;
  bool shortcuts = false;
  // Cap on sub-steps per search; 0 picks 6 * (I + 2). Explicit values must
  // be at least 3 * (I + 2).
  int max_steps = 0;

  // Throws std::invalid_argument.
  void Validate() const;
  int EffectiveMaxSteps(int source_len) const;

  std::string ToJson() const;
  // Fields absent from the JSON object keep the values in `base`.
  static DecodeParams FromJson(const std::string& json_text,
                               const DecodeParams& base);
  static DecodeParams FromJson(const std::string& json_text);
};

// Length-normalisation divisor ((5 + n) / 6)^alpha.
double LengthPenalty(int length, double alpha);

// Counts of model evaluations made by one search.
struct DecodeStats {
  int rounds = 0;                   // sub-step rounds of the beam
  int tag_evaluations = 0;          // decoder A + tag head
  int span_evaluations = 0;         // pointer head
  int replacement_evaluations = 0;  // decoder B + replacement head
  int token_evaluations = 0;        // full-sequence mode
  int passes = 0;

  int total() const {
    return tag_evaluations + span_evaluations + replacement_evaluations +
           token_evaluations;
  }
  DecodeStats& operator+=(const DecodeStats& o);
};

struct Hypothesis {
  EditSequence edits;        // relative to `source`
  TargetSequence output;
  std::vector<TokenId> source;  // input of the pass that produced `edits`
  double raw_score = 0;      // weighted log-probability sum, all passes
  double score = 0;          // ranking score (normalised, penalised)
  bool identity = false;     // output equals the pass input
};

// Oracle labels drawn from a gold edit sequence.
struct OracleConstraint {
  std::optional<std::vector<TagId>> tags;
  std::optional<std::vector<int>> spans;
  bool allow_repeat = false;

  static OracleConstraint FromEdits(const EditSequence& gold, bool use_tags,
                                    bool use_spans, bool allow_repeat);
};

// No hypothesis finished within the step cap.
class SearchError : public std::runtime_error {
 public:
  SearchError(const std::string& what, EditSequence best_partial)
      : std::runtime_error(what), best_partial_(std::move(best_partial)) {}
  const EditSequence& best_partial() const { return best_partial_; }

 private:
  EditSequence best_partial_;
};

// Beam search in edit mode. Returns up to beam_size finished hypotheses,
// best first. Ignores refinement_passes.
std::vector<Hypothesis> BeamDecode(const EditModel& model,
                                   const SourceSequence& src,
                                   const DecodeParams& params,
                                   DecodeStats* stats = nullptr);

// Beam search with some features forced to oracle labels. Throws
// std::invalid_argument if the constraint carries no labels.
std::vector<Hypothesis> ConstrainedDecode(const EditModel& model,
                                          const SourceSequence& src,
                                          const DecodeParams& params,
                                          const OracleConstraint& constraint,
                                          DecodeStats* stats = nullptr);

// refinement_passes rounds of BeamDecode, feeding each n-best output back
// as a new source. Scores accumulate along the chain; candidates are
// merged by output text.
std::vector<Hypothesis> IterativeRefine(const EditModel& model,
                                        const SourceSequence& src,
                                        const DecodeParams& params,
                                        DecodeStats* stats = nullptr);

// Step-wise argmax, written independently of the beam.
Hypothesis GreedyDecode(const EditModel& model, const SourceSequence& src,
                        const DecodeParams& params,
                        DecodeStats* stats = nullptr);

// Weighted log-probability of `edits` recomputed by teacher forcing. With
// shortcuts, replacement terms of SELF ops and span/replacement terms of
// the EOS op are dropped.
double ScoreEdits(const EditModel& model, const SourceSequence& src,
                  const EditSequence& edits, const DecodeParams& params);

// Token-level beam search of a full-sequence model.
std::vector<Hypothesis> FullSequenceDecode(const EditModel& model,
                                           const SourceSequence& src,
                                           const DecodeParams& params,
                                           DecodeStats* stats = nullptr);

// Decodes with whichever search the model mode and params call for.
std::vector<Hypothesis> Decode(const EditModel& model,
                               const SourceSequence& src,
                               const DecodeParams& params,
                               DecodeStats* stats = nullptr);

// Exhaustive search of the three weights over {0.5, 0.75, 1.0, 1.25, 1.5}^3,
// maximising `objective` (higher is better). Ties keep the earlier point in
// (tag, span, replacement) lexicographic order.
struct LambdaSearchResult {
  DecodeParams best;
  double best_objective = 0;
  int evaluations = 0;
};
LambdaSearchResult GridSearchLambdas(
    const DecodeParams& base,
    const std::function<double(const DecodeParams&)>& objective);

}  // namespace spanedit

#endif  // SPANEDIT_DECODER_H_
