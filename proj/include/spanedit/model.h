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

// Split-decoder edit model.
//
// A Transformer encoder reads the source. Decoder A consumes, at step n, a
// projection of [tag embedding of t_{n-1}; encoder state at p_{n-1};
// token embedding of r_{n-1}] and produces h_n. The tag head reads h_n;
// the span head is a single-head scaled dot-product pointer whose query is
// h_n plus a projection of the chosen tag's embedding, and whose keys are
// the encoder states. Decoder B starts from h_n plus a projection of
// [tag embedding of t_n; encoder state at p_n], cross-attends causally
// over decoder A's outputs, and feeds the replacement head.
//
// In full-sequence mode the same A+B stack is an ordinary token decoder and
// the tag/span parameters do not exist.

#ifndef SPANEDIT_MODEL_H_
#define SPANEDIT_MODEL_H_

#include <cstdint>
#include <memory>
#include <random>
#include <utility>
#include <span>
#include <string>
#include <vector>

#include "spanedit/autodiff.h"
#include "spanedit/core.h"

namespace spanedit {

enum class ModelMode { kEdit, kFullSequence };

std::string ModeName(ModelMode mode);
ModelMode ParseModelMode(std::string_view name);

struct ModelConfig {
  int hidden_units = 64;
  int encoder_layers = 2;
  int decoder_a_layers = 1;
  int decoder_b_layers = 1;
  int attention_heads = 4;
  int filter_units = 128;
  int tag_embed_dim = 6;
  int max_positions = 64;
  int vocab_size = 0;   // token vocabulary, reserved ids included
  int tagset_size = 0;  // SELF and EOS included
  ModelMode mode = ModelMode::kEdit;
  // Extra cross-attention from decoder B to the encoder states.
  bool decoder_b_encoder_attention = false;
  // Zero the tag, span-query and replacement projections at init so every
  // head starts out uniform.
  bool zero_init_heads = false;

  // Throws std::invalid_argument on inconsistent values.
  void Validate() const;
  // Replacement classes: every token id plus the SELF marker at vocab_size.
  int replacement_classes() const { return vocab_size + 1; }

  // The large-scale configurations (512 and 1024 hidden units).
  static ModelConfig Base(int vocab_size, int tagset_size);
  static ModelConfig Big(int vocab_size, int tagset_size);

  bool operator==(const ModelConfig&) const = default;
};

// Feedback for decoder A at step n: the previous op's fields.
struct StepFeedback {
  TagId prev_tag = kSelfTag;
  int prev_span_end = 0;
  TokenId prev_replacement = kPadId;

  bool operator==(const StepFeedback&) const = default;
};

inline StepFeedback StartFeedback() { return {kSelfTag, 0, kPadId}; }
inline StepFeedback FeedbackAfter(const EditOp& op) {
  return {op.tag, op.span_end, op.replacement};
}
// [start, after op 1, ..., after op N-1] for teacher forcing N ops.
std::vector<StepFeedback> TeacherFeedback(std::span<const EditOp> ops);

struct LossBreakdown {
  double tag_ce = 0;
  double span_ce = 0;
  double replacement_ce = 0;
  double total = 0;
};

// Log-probabilities of the three predictions of one gold op.
struct StepLogProbs {
  double tag = 0;
  double span = 0;
  double replacement = 0;
};

// Index of a replacement (token id or kSelfReplacement) in the output layer.
int ReplacementClass(TokenId replacement, int vocab_size);
TokenId ReplacementFromClass(int cls, int vocab_size);

struct NamedParameter {
  std::string name;
  autodiff::Tensor tensor;
};

class EditModel;

// Source-dependent values computed once per input and reused by every
// decoding step: encoder states and their key/value projections.
class EncodedSource {
 public:
  const autodiff::Matrix& states() const { return states_.value(); }
  int length() const { return static_cast<int>(states_.rows()); }

 private:
  friend class EditModel;
  autodiff::Tensor states_;
  autodiff::Tensor extended_;   // learned start row, then the states
  autodiff::Tensor span_keys_;
  std::vector<autodiff::Tensor> a_keys_, a_values_;
  std::vector<autodiff::Tensor> b_keys_, b_values_;
};

class EditModel {
 public:
  // Random initialisation, deterministic in `seed`.
  EditModel(ModelConfig config, std::uint64_t seed);
  EditModel(EditModel&&) = default;
  EditModel& operator=(EditModel&&) = default;
  EditModel(const EditModel&) = delete;
  EditModel& operator=(const EditModel&) = delete;

  // Deep copy with independent parameters.
  EditModel Clone() const;

  const ModelConfig& config() const { return config_; }
  std::vector<NamedParameter>& parameters() { return params_; }
  const std::vector<NamedParameter>& parameters() const { return params_; }
  // Throws std::out_of_range for unknown names.
  autodiff::Tensor& parameter(std::string_view name);
  std::size_t parameter_count() const;
  bool AllFinite() const;

  // --- Inference. All of these are const and record no graph. ---

  // Throws DataError when the source exceeds max_positions.
  EncodedSource Encode(const SourceSequence& src) const;

  // Decoder A outputs for every step of `history` (one row per step).
  autodiff::Matrix DecoderAStates(const EncodedSource& enc,
                                  std::span<const StepFeedback> history) const;
  // Last row of DecoderAStates().
  autodiff::RowVector DecoderAStep(const EncodedSource& enc,
                                   std::span<const StepFeedback> history) const;

  autodiff::RowVector TagLogProbs(const autodiff::RowVector& h) const;
  std::vector<double> PredictTag(const autodiff::RowVector& h) const;

  // Log-distribution over span end positions 1..I (entry k is position k+1).
  autodiff::RowVector SpanLogProbs(const autodiff::RowVector& h, TagId tag,
                                   const EncodedSource& enc) const;
  std::vector<double> PredictSpan(const autodiff::RowVector& h, TagId tag,
                                  const EncodedSource& enc) const;

  // Log-distribution over replacement classes for step n, where
  // `a_states` holds decoder A rows 1..n and (tag, span_end) = (t_n, p_n).
  autodiff::RowVector ReplacementLogProbs(const EncodedSource& enc,
                                          const autodiff::Matrix& a_states,
                                          TagId tag, int span_end) const;
  std::vector<double> DecoderBStep(const EncodedSource& enc,
                                   const autodiff::Matrix& a_states, TagId tag,
                                   int span_end) const;

  // Full-sequence mode: log-distribution of the next target token given
  // the prefix y_1..y_{j-1}. Throws std::logic_error in edit mode.
  autodiff::RowVector FullSequenceLogProbs(
      const EncodedSource& enc, std::span<const TokenId> prefix) const;
  std::vector<double> FullSequenceStep(const EncodedSource& enc,
                                       std::span<const TokenId> prefix) const;

  // Per-step averaged cross-entropies of the gold edits under teacher
  // forcing. Throws DataError for invalid edits or span ends of 0.
  LossBreakdown TeacherForcedLoss(const SourceSequence& src,
                                  const EditSequence& gold) const;
  // Per-op log-probabilities of `gold` computed in one teacher-forced pass.
  std::vector<StepLogProbs> TeacherForcedLogProbs(
      const SourceSequence& src, const EditSequence& gold) const;
  // Full-sequence mode: cross-entropy of target tokens plus the end marker,
  // reported as the replacement component.
  LossBreakdown FullSequenceLoss(const SourceSequence& src,
                                 const TargetSequence& tgt) const;

  // --- Training graphs (gradients flow into parameters()). ---
  autodiff::Tensor EditLossGraph(const SourceSequence& src,
                                 const EditSequence& gold,
                                 LossBreakdown* breakdown) const;
  autodiff::Tensor FullSequenceLossGraph(const SourceSequence& src,
                                         const TargetSequence& tgt,
                                         LossBreakdown* breakdown) const;

 private:
  struct Attention {
    autodiff::Tensor wq, bq, wk, bk, wv, bv, wo, bo;
  };
  struct FeedForward {
    autodiff::Tensor w1, b1, w2, b2;
  };
  struct Norm {
    autodiff::Tensor gain, bias;
  };
  struct EncoderLayer {
    Norm norm1, norm2;
    Attention self_attention;
    FeedForward ffn;
  };
  struct DecoderALayer {
    Norm norm1, norm2, norm3;
    Attention self_attention, encoder_attention;
    FeedForward ffn;
  };
  struct DecoderBLayer {
    Norm norm1, norm2, norm3;
    Attention a_attention, encoder_attention;
    FeedForward ffn;
  };

  autodiff::Tensor NewParameter(std::string name, int rows, int cols,
                                double init_range, std::mt19937_64& rng);
  autodiff::Tensor NewFilled(std::string name, int rows, int cols,
                             double value);
  Attention NewAttention(const std::string& prefix, std::mt19937_64& rng);
  FeedForward NewFeedForward(const std::string& prefix, std::mt19937_64& rng);
  Norm NewNorm(const std::string& prefix);
  std::pair<autodiff::Tensor, autodiff::Tensor> ProjectKeysValues(
      const Attention& att, const autodiff::Tensor& memory) const;

  void CheckMode(ModelMode mode, const char* op) const;

  autodiff::Tensor AttentionBlock(const Attention& att,
                                  const autodiff::Tensor& queries,
                                  const autodiff::Tensor& keys,
                                  const autodiff::Tensor& values,
                                  const autodiff::Matrix* mask) const;
  autodiff::Tensor FeedForwardBlock(const FeedForward& ffn,
                                    const autodiff::Tensor& x) const;
  autodiff::Tensor NormBlock(const Norm& norm, const autodiff::Tensor& x) const;

  EncodedSource EncodeGraph(const SourceSequence& src) const;
  autodiff::Tensor DecoderAInputEdit(const EncodedSource& enc,
                                     std::span<const StepFeedback> history) const;
  autodiff::Tensor DecoderAInputFull(std::span<const TokenId> prev_tokens) const;
  autodiff::Tensor RunDecoderA(const EncodedSource& enc,
                               const autodiff::Tensor& input) const;
  // Decoder B over `queries`; query row k sees A rows up to k + offset.
  autodiff::Tensor RunDecoderB(const EncodedSource& enc,
                               const autodiff::Tensor& queries,
                               const autodiff::Tensor& a_states,
                               Eigen::Index offset) const;
  autodiff::Tensor BInputEdit(const EncodedSource& enc,
                              const autodiff::Tensor& a_states,
                              std::span<const TagId> tags,
                              std::span<const int> spans) const;
  // Teacher-forced tag, span and replacement logits, one row per op.
  struct EditLogits {
    autodiff::Tensor tag, span, replacement;
    std::vector<int> tag_targets, span_targets, replacement_targets;
  };
  EditLogits TeacherForcedLogits(const SourceSequence& src,
                                 const EditSequence& gold) const;
  autodiff::Tensor SpanLogits(const EncodedSource& enc,
                              const autodiff::Tensor& h,
                              std::span<const TagId> tags) const;

  ModelConfig config_;
  std::uint64_t seed_ = 0;
  std::vector<NamedParameter> params_;

  autodiff::Tensor token_embedding_;
  autodiff::Tensor source_positions_;
  autodiff::Tensor target_positions_;
  std::vector<EncoderLayer> encoder_;
  Norm encoder_norm_;
  std::vector<DecoderALayer> decoder_a_;
  Norm decoder_a_norm_;
  std::vector<DecoderBLayer> decoder_b_;
  Norm decoder_b_norm_;
  autodiff::Tensor replacement_w_, replacement_b_;
  // Edit mode only.
  autodiff::Tensor tag_embedding_;
  autodiff::Tensor start_state_;
  autodiff::Tensor feedback_w_, feedback_b_;
  autodiff::Tensor tag_w_, tag_b_;
  autodiff::Tensor span_tag_w_, span_tag_b_;
  autodiff::Tensor span_query_w_, span_query_b_;
  autodiff::Tensor span_key_w_, span_key_b_;
  autodiff::Tensor b_input_w_, b_input_b_;
};

}  // namespace spanedit

#endif  // SPANEDIT_MODEL_H_
