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

#include "spanedit/model.h"

#include <cmath>
#include <stdexcept>

#include "spanedit/editops.h"

namespace spanedit {

using autodiff::Matrix;
using autodiff::RowVector;
using autodiff::Tensor;

namespace {

double GlorotRange(int fan_in, int fan_out) {
  return std::sqrt(6.0 / (fan_in + fan_out));
}

std::vector<double> ExpVector(const RowVector& logp) {
  std::vector<double> out(logp.size());
  for (Eigen::Index i = 0; i < logp.size(); ++i) out[i] = std::exp(logp(i));
  return out;
}

RowVector LogSoftmaxRow(const Tensor& logits) {
  return autodiff::LogSoftmax(logits.value()).row(0);
}

Tensor Sum3(const Tensor& a, const Tensor& b, const Tensor& c) {
  return Add(Add(a, b), c);
}

}  // namespace

std::string ModeName(ModelMode mode) {
  return mode == ModelMode::kEdit ? "edit" : "fullseq";
}

ModelMode ParseModelMode(std::string_view name) {
  if (name == "edit") return ModelMode::kEdit;
  if (name == "fullseq" || name == "full_sequence") {
    return ModelMode::kFullSequence;
  }
  throw std::invalid_argument("unknown mode '" + std::string(name) +
                              "'; valid: edit, fullseq");
}

void ModelConfig::Validate() const {
  auto fail = [](const std::string& msg) {
    throw std::invalid_argument("invalid model config: " + msg);
  };
  if (hidden_units < 1) fail("hidden_units must be positive");
  if (attention_heads < 1 || hidden_units % attention_heads != 0) {
    fail("hidden_units must be divisible by attention_heads");
  }
  if (encoder_layers < 1 || decoder_a_layers < 1 || decoder_b_layers < 1) {
    fail("layer counts must be >= 1");
  }
  if (filter_units < 1) fail("filter_units must be positive");
  if (tag_embed_dim < 1) fail("tag_embed_dim must be >= 1");
  if (max_positions < 1) fail("max_positions must be >= 1");
  if (vocab_size < kFirstOrdinaryId) fail("vocab_size must cover reserved ids");
  if (mode == ModelMode::kEdit && tagset_size < 1) {
    fail("tagset_size must be >= 1");
  }
}

ModelConfig ModelConfig::Base(int vocab_size, int tagset_size) {
  ModelConfig c;
  c.hidden_units = 512;
  c.encoder_layers = 6;
  c.decoder_a_layers = 3;
  c.decoder_b_layers = 3;
  c.attention_heads = 8;
  c.filter_units = 2048;
  c.max_positions = 256;
  c.vocab_size = vocab_size;
  c.tagset_size = tagset_size;
  return c;
}

ModelConfig ModelConfig::Big(int vocab_size, int tagset_size) {
  ModelConfig c = Base(vocab_size, tagset_size);
  c.hidden_units = 1024;
  c.decoder_a_layers = 4;
  c.decoder_b_layers = 4;
  c.attention_heads = 16;
  c.filter_units = 4096;
  return c;
}

std::vector<StepFeedback> TeacherFeedback(std::span<const EditOp> ops) {
  std::vector<StepFeedback> history;
  history.reserve(ops.size());
  history.push_back(StartFeedback());
  for (std::size_t i = 0; i + 1 < ops.size(); ++i) {
    history.push_back(FeedbackAfter(ops[i]));
  }
  return history;
}

int ReplacementClass(TokenId replacement, int vocab_size) {
  if (replacement == kSelfReplacement) return vocab_size;
  if (replacement < 0 || replacement >= vocab_size) {
    throw std::out_of_range("replacement id " + std::to_string(replacement) +
                            " outside vocabulary");
  }
  return replacement;
}

TokenId ReplacementFromClass(int cls, int vocab_size) {
  return cls == vocab_size ? kSelfReplacement : static_cast<TokenId>(cls);
}

// ---------------------------------------------------------------------------
// Construction

Tensor EditModel::NewParameter(std::string name, int rows, int cols,
                               double init_range, std::mt19937_64& rng) {
  Matrix m(rows, cols);
  std::uniform_real_distribution<double> dist(-init_range, init_range);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
  Tensor t = Tensor::Parameter(std::move(m));
  params_.push_back({std::move(name), t});
  return t;
}

Tensor EditModel::NewFilled(std::string name, int rows, int cols,
                            double value) {
  Tensor t = Tensor::Parameter(Matrix::Constant(rows, cols, value));
  params_.push_back({std::move(name), t});
  return t;
}

EditModel::Attention EditModel::NewAttention(const std::string& prefix,
                                             std::mt19937_64& rng) {
  const int d = config_.hidden_units;
  const double r = GlorotRange(d, d);
  Attention a;
  a.wq = NewParameter(prefix + "/query/w", d, d, r, rng);
  a.bq = NewFilled(prefix + "/query/b", 1, d, 0.0);
  a.wk = NewParameter(prefix + "/key/w", d, d, r, rng);
  a.bk = NewFilled(prefix + "/key/b", 1, d, 0.0);
  a.wv = NewParameter(prefix + "/value/w", d, d, r, rng);
  a.bv = NewFilled(prefix + "/value/b", 1, d, 0.0);
  a.wo = NewParameter(prefix + "/output/w", d, d, r, rng);
  a.bo = NewFilled(prefix + "/output/b", 1, d, 0.0);
  return a;
}

EditModel::FeedForward EditModel::NewFeedForward(const std::string& prefix,
                                                 std::mt19937_64& rng) {
  const int d = config_.hidden_units, f = config_.filter_units;
  FeedForward ffn;
  ffn.w1 = NewParameter(prefix + "/w1", d, f, GlorotRange(d, f), rng);
  ffn.b1 = NewFilled(prefix + "/b1", 1, f, 0.0);
  ffn.w2 = NewParameter(prefix + "/w2", f, d, GlorotRange(f, d), rng);
  ffn.b2 = NewFilled(prefix + "/b2", 1, d, 0.0);
  return ffn;
}

EditModel::Norm EditModel::NewNorm(const std::string& prefix) {
  const int d = config_.hidden_units;
  return {NewFilled(prefix + "/gain", 1, d, 1.0),
          NewFilled(prefix + "/bias", 1, d, 0.0)};
}

EditModel::EditModel(ModelConfig config, std::uint64_t seed)
    : config_(config), seed_(seed) {
  config_.Validate();
  std::mt19937_64 rng(seed);
  const int d = config_.hidden_units;
  const int e = config_.tag_embed_dim;
  const int classes = config_.replacement_classes();
  const int positions = config_.max_positions;
  const double embed_range = 0.1;

  token_embedding_ =
      NewParameter("embedding/tokens", classes, d, embed_range, rng);
  source_positions_ =
      NewParameter("embedding/source_positions", positions, d, embed_range, rng);
  target_positions_ =
      NewParameter("embedding/target_positions", positions, d, embed_range, rng);

  for (int l = 0; l < config_.encoder_layers; ++l) {
    const std::string p = "encoder/layer" + std::to_string(l);
    EncoderLayer layer;
    layer.norm1 = NewNorm(p + "/norm1");
    layer.self_attention = NewAttention(p + "/self_attention", rng);
    layer.norm2 = NewNorm(p + "/norm2");
    layer.ffn = NewFeedForward(p + "/ffn", rng);
    encoder_.push_back(std::move(layer));
  }
  encoder_norm_ = NewNorm("encoder/norm");

  const bool edit = config_.mode == ModelMode::kEdit;
  if (edit) {
    tag_embedding_ =
        NewParameter("edit/tag_embedding", config_.tagset_size, e, embed_range, rng);
    start_state_ = NewParameter("edit/start_state", 1, d, embed_range, rng);
    const int fb_in = e + d + d;
    feedback_w_ = NewParameter("edit/feedback/w", fb_in, d,
                               GlorotRange(fb_in, d), rng);
    feedback_b_ = NewFilled("edit/feedback/b", 1, d, 0.0);
  }

  for (int l = 0; l < config_.decoder_a_layers; ++l) {
    const std::string p = "decoder_a/layer" + std::to_string(l);
    DecoderALayer layer;
    layer.norm1 = NewNorm(p + "/norm1");
    layer.self_attention = NewAttention(p + "/self_attention", rng);
    layer.norm2 = NewNorm(p + "/norm2");
    layer.encoder_attention = NewAttention(p + "/encoder_attention", rng);
    layer.norm3 = NewNorm(p + "/norm3");
    layer.ffn = NewFeedForward(p + "/ffn", rng);
    decoder_a_.push_back(std::move(layer));
  }
  decoder_a_norm_ = NewNorm("decoder_a/norm");

  const double head_scale = config_.zero_init_heads ? 0.0 : 1.0;
  if (edit) {
    const int tags = config_.tagset_size;
    tag_w_ = NewParameter("edit/tag_head/w", d, tags,
                          head_scale * GlorotRange(d, tags), rng);
    tag_b_ = NewFilled("edit/tag_head/b", 1, tags, 0.0);
    span_tag_w_ =
        NewParameter("edit/span/tag_w", e, d, GlorotRange(e, d), rng);
    span_tag_b_ = NewFilled("edit/span/tag_b", 1, d, 0.0);
    span_query_w_ = NewParameter("edit/span/query_w", d, d,
                                 head_scale * GlorotRange(d, d), rng);
    span_query_b_ = NewFilled("edit/span/query_b", 1, d, 0.0);
    span_key_w_ = NewParameter("edit/span/key_w", d, d, GlorotRange(d, d), rng);
    span_key_b_ = NewFilled("edit/span/key_b", 1, d, 0.0);
    const int b_in = e + d;
    b_input_w_ =
        NewParameter("edit/b_input/w", b_in, d, GlorotRange(b_in, d), rng);
    b_input_b_ = NewFilled("edit/b_input/b", 1, d, 0.0);
  }

  for (int l = 0; l < config_.decoder_b_layers; ++l) {
    const std::string p = "decoder_b/layer" + std::to_string(l);
    DecoderBLayer layer;
    layer.norm1 = NewNorm(p + "/norm1");
    layer.a_attention = NewAttention(p + "/a_attention", rng);
    if (config_.decoder_b_encoder_attention) {
      layer.norm2 = NewNorm(p + "/norm2");
      layer.encoder_attention = NewAttention(p + "/encoder_attention", rng);
    }
    layer.norm3 = NewNorm(p + "/norm3");
    layer.ffn = NewFeedForward(p + "/ffn", rng);
    decoder_b_.push_back(std::move(layer));
  }
  decoder_b_norm_ = NewNorm("decoder_b/norm");

  replacement_w_ = NewParameter("replacement_head/w", d, classes,
                                head_scale * GlorotRange(d, classes), rng);
  replacement_b_ = NewFilled("replacement_head/b", 1, classes, 0.0);
}

EditModel EditModel::Clone() const {
  EditModel copy(config_, seed_);
  for (std::size_t i = 0; i < params_.size(); ++i) {
    copy.params_[i].tensor.mutable_value() = params_[i].tensor.value();
  }
  return copy;
}

Tensor& EditModel::parameter(std::string_view name) {
  for (auto& p : params_) {
    if (p.name == name) return p.tensor;
  }
  throw std::out_of_range("no parameter named " + std::string(name));
}

std::size_t EditModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.tensor.value().size();
  return n;
}

bool EditModel::AllFinite() const {
  for (const auto& p : params_) {
    if (!p.tensor.value().allFinite()) return false;
  }
  return true;
}

void EditModel::CheckMode(ModelMode mode, const char* op) const {
  if (config_.mode != mode) {
    throw std::logic_error(std::string(op) + " requires a " + ModeName(mode) +
                           " model, got " + ModeName(config_.mode));
  }
}

// ---------------------------------------------------------------------------
// Building blocks

std::pair<Tensor, Tensor> EditModel::ProjectKeysValues(
    const Attention& att, const Tensor& memory) const {
  return {Linear(memory, att.wk, att.bk), Linear(memory, att.wv, att.bv)};
}

Tensor EditModel::AttentionBlock(const Attention& att, const Tensor& queries,
                                 const Tensor& keys, const Tensor& values,
                                 const Matrix* mask) const {
  const int heads = config_.attention_heads;
  const int dh = config_.hidden_units / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  Tensor q = Linear(queries, att.wq, att.bq);
  std::vector<Tensor> outputs;
  outputs.reserve(heads);
  for (int h = 0; h < heads; ++h) {
    Tensor qh = heads == 1 ? q : SliceCols(q, h * dh, dh);
    Tensor kh = heads == 1 ? keys : SliceCols(keys, h * dh, dh);
    Tensor vh = heads == 1 ? values : SliceCols(values, h * dh, dh);
    Tensor scores = Scale(MatMulTransposed(qh, kh), scale);
    if (mask != nullptr) scores = AddConstant(scores, *mask);
    outputs.push_back(MatMul(SoftmaxRows(scores), vh));
  }
  Tensor merged = heads == 1 ? outputs[0] : ConcatCols(outputs);
  return Linear(merged, att.wo, att.bo);
}

Tensor EditModel::FeedForwardBlock(const FeedForward& ffn,
                                   const Tensor& x) const {
  return Linear(Relu(Linear(x, ffn.w1, ffn.b1)), ffn.w2, ffn.b2);
}

Tensor EditModel::NormBlock(const Norm& norm, const Tensor& x) const {
  return LayerNorm(x, norm.gain, norm.bias);
}

EncodedSource EditModel::EncodeGraph(const SourceSequence& src) const {
  const int len = src.length();
  if (len > config_.max_positions) {
    throw DataError("source length " + std::to_string(len) +
                    " exceeds max_positions " +
                    std::to_string(config_.max_positions));
  }
  std::vector<int> ids(src.tokens().begin(), src.tokens().end());
  for (int id : ids) {
    if (id < 0 || id >= config_.vocab_size) {
      throw DataError("source token id " + std::to_string(id) +
                      " outside the model vocabulary");
    }
  }
  Tensor x = Add(GatherRows(token_embedding_, ids),
                 SliceRows(source_positions_, 0, len));
  for (const auto& layer : encoder_) {
    Tensor h = NormBlock(layer.norm1, x);
    auto [k, v] = ProjectKeysValues(layer.self_attention, h);
    x = Add(x, AttentionBlock(layer.self_attention, h, k, v, nullptr));
    x = Add(x, FeedForwardBlock(layer.ffn, NormBlock(layer.norm2, x)));
  }

  EncodedSource enc;
  enc.states_ = NormBlock(encoder_norm_, x);
  for (const auto& layer : decoder_a_) {
    auto [k, v] = ProjectKeysValues(layer.encoder_attention, enc.states_);
    enc.a_keys_.push_back(k);
    enc.a_values_.push_back(v);
  }
  if (config_.decoder_b_encoder_attention) {
    for (const auto& layer : decoder_b_) {
      auto [k, v] = ProjectKeysValues(layer.encoder_attention, enc.states_);
      enc.b_keys_.push_back(k);
      enc.b_values_.push_back(v);
    }
  }
  if (config_.mode == ModelMode::kEdit) {
    const Tensor rows[] = {start_state_, enc.states_};
    enc.extended_ = ConcatRows(rows);
    enc.span_keys_ = Linear(enc.states_, span_key_w_, span_key_b_);
  }
  return enc;
}

Tensor EditModel::DecoderAInputEdit(
    const EncodedSource& enc, std::span<const StepFeedback> history) const {
  const int n = static_cast<int>(history.size());
  if (n < 1) throw std::invalid_argument("decoder A needs at least one step");
  if (n > config_.max_positions) {
    throw DataError("edit step " + std::to_string(n) +
                    " exceeds max_positions " +
                    std::to_string(config_.max_positions));
  }
  std::vector<int> tags, spans, repl;
  tags.reserve(n);
  spans.reserve(n);
  repl.reserve(n);
  for (const auto& fb : history) {
    if (fb.prev_span_end < 0 || fb.prev_span_end > enc.length()) {
      throw DataError("feedback span end " + std::to_string(fb.prev_span_end) +
                      " outside [0, " + std::to_string(enc.length()) + "]");
    }
    tags.push_back(fb.prev_tag);
    spans.push_back(fb.prev_span_end);
    repl.push_back(ReplacementClass(fb.prev_replacement, config_.vocab_size));
  }
  const Tensor parts[] = {GatherRows(tag_embedding_, tags),
                          GatherRows(enc.extended_, spans),
                          GatherRows(token_embedding_, repl)};
  Tensor x = Linear(ConcatCols(parts), feedback_w_, feedback_b_);
  return Add(x, SliceRows(target_positions_, 0, n));
}

Tensor EditModel::DecoderAInputFull(std::span<const TokenId> prev) const {
  const int n = static_cast<int>(prev.size());
  if (n > config_.max_positions) {
    throw DataError("target step " + std::to_string(n) +
                    " exceeds max_positions " +
                    std::to_string(config_.max_positions));
  }
  std::vector<int> ids(prev.begin(), prev.end());
  return Add(GatherRows(token_embedding_, ids),
             SliceRows(target_positions_, 0, n));
}

Tensor EditModel::RunDecoderA(const EncodedSource& enc,
                              const Tensor& input) const {
  const Matrix mask = autodiff::CausalMask(input.rows(), input.rows());
  Tensor x = input;
  for (std::size_t l = 0; l < decoder_a_.size(); ++l) {
    const auto& layer = decoder_a_[l];
    Tensor h = NormBlock(layer.norm1, x);
    auto [k, v] = ProjectKeysValues(layer.self_attention, h);
    x = Add(x, AttentionBlock(layer.self_attention, h, k, v, &mask));
    x = Add(x, AttentionBlock(layer.encoder_attention, NormBlock(layer.norm2, x),
                              enc.a_keys_[l], enc.a_values_[l], nullptr));
    x = Add(x, FeedForwardBlock(layer.ffn, NormBlock(layer.norm3, x)));
  }
  return NormBlock(decoder_a_norm_, x);
}

Tensor EditModel::RunDecoderB(const EncodedSource& enc, const Tensor& queries,
                              const Tensor& a_states,
                              Eigen::Index offset) const {
  const Matrix mask =
      autodiff::CausalMask(queries.rows(), a_states.rows(), offset);
  Tensor x = queries;
  for (std::size_t l = 0; l < decoder_b_.size(); ++l) {
    const auto& layer = decoder_b_[l];
    auto [k, v] = ProjectKeysValues(layer.a_attention, a_states);
    x = Add(x, AttentionBlock(layer.a_attention, NormBlock(layer.norm1, x), k, v,
                              &mask));
    if (config_.decoder_b_encoder_attention) {
      x = Add(x, AttentionBlock(layer.encoder_attention,
                                NormBlock(layer.norm2, x), enc.b_keys_[l],
                                enc.b_values_[l], nullptr));
    }
    x = Add(x, FeedForwardBlock(layer.ffn, NormBlock(layer.norm3, x)));
  }
  return NormBlock(decoder_b_norm_, x);
}

Tensor EditModel::BInputEdit(const EncodedSource& enc, const Tensor& a_states,
                             std::span<const TagId> tags,
                             std::span<const int> spans) const {
  std::vector<int> tag_ids(tags.begin(), tags.end());
  std::vector<int> span_ids(spans.begin(), spans.end());
  const Tensor parts[] = {GatherRows(tag_embedding_, tag_ids),
                          GatherRows(enc.extended_, span_ids)};
  return Add(a_states, Linear(ConcatCols(parts), b_input_w_, b_input_b_));
}

Tensor EditModel::SpanLogits(const EncodedSource& enc, const Tensor& h,
                             std::span<const TagId> tags) const {
  std::vector<int> tag_ids(tags.begin(), tags.end());
  Tensor conditioned =
      Add(h, Linear(GatherRows(tag_embedding_, tag_ids), span_tag_w_, span_tag_b_));
  Tensor q = Linear(conditioned, span_query_w_, span_query_b_);
  const double scale = 1.0 / std::sqrt(static_cast<double>(config_.hidden_units));
  return Scale(MatMulTransposed(q, enc.span_keys_), scale);
}

// ---------------------------------------------------------------------------
// Inference

EncodedSource EditModel::Encode(const SourceSequence& src) const {
  autodiff::NoGradGuard no_grad;
  return EncodeGraph(src);
}

Matrix EditModel::DecoderAStates(const EncodedSource& enc,
                                 std::span<const StepFeedback> history) const {
  CheckMode(ModelMode::kEdit, "DecoderAStates");
  autodiff::NoGradGuard no_grad;
  return RunDecoderA(enc, DecoderAInputEdit(enc, history)).value();
}

RowVector EditModel::DecoderAStep(const EncodedSource& enc,
                                  std::span<const StepFeedback> history) const {
  Matrix states = DecoderAStates(enc, history);
  return states.row(states.rows() - 1);
}

RowVector EditModel::TagLogProbs(const RowVector& h) const {
  CheckMode(ModelMode::kEdit, "TagLogProbs");
  autodiff::NoGradGuard no_grad;
  return LogSoftmaxRow(Linear(Tensor::Constant(h), tag_w_, tag_b_));
}

std::vector<double> EditModel::PredictTag(const RowVector& h) const {
  return ExpVector(TagLogProbs(h));
}

RowVector EditModel::SpanLogProbs(const RowVector& h, TagId tag,
                                  const EncodedSource& enc) const {
  CheckMode(ModelMode::kEdit, "SpanLogProbs");
  if (tag < 0 || tag >= config_.tagset_size) {
    throw std::out_of_range("tag id outside the model tag set");
  }
  autodiff::NoGradGuard no_grad;
  const TagId tags[] = {tag};
  return LogSoftmaxRow(SpanLogits(enc, Tensor::Constant(h), tags));
}

std::vector<double> EditModel::PredictSpan(const RowVector& h, TagId tag,
                                           const EncodedSource& enc) const {
  return ExpVector(SpanLogProbs(h, tag, enc));
}

RowVector EditModel::ReplacementLogProbs(const EncodedSource& enc,
                                         const Matrix& a_states, TagId tag,
                                         int span_end) const {
  CheckMode(ModelMode::kEdit, "ReplacementLogProbs");
  if (span_end < 0 || span_end > enc.length()) {
    throw DataError("span end " + std::to_string(span_end) + " outside [0, " +
                    std::to_string(enc.length()) + "]");
  }
  if (tag < 0 || tag >= config_.tagset_size) {
    throw std::out_of_range("tag id outside the model tag set");
  }
  autodiff::NoGradGuard no_grad;
  Tensor a = Tensor::Constant(a_states);
  Tensor last = SliceRows(a, a.rows() - 1, 1);
  const TagId tags[] = {tag};
  const int spans[] = {span_end};
  Tensor b = RunDecoderB(enc, BInputEdit(enc, last, tags, spans), a,
                         a.rows() - 1);
  return LogSoftmaxRow(Linear(b, replacement_w_, replacement_b_));
}

std::vector<double> EditModel::DecoderBStep(const EncodedSource& enc,
                                            const Matrix& a_states, TagId tag,
                                            int span_end) const {
  return ExpVector(ReplacementLogProbs(enc, a_states, tag, span_end));
}

RowVector EditModel::FullSequenceLogProbs(
    const EncodedSource& enc, std::span<const TokenId> prefix) const {
  CheckMode(ModelMode::kFullSequence, "FullSequenceLogProbs");
  autodiff::NoGradGuard no_grad;
  std::vector<TokenId> prev;
  prev.reserve(prefix.size() + 1);
  prev.push_back(kPadId);
  prev.insert(prev.end(), prefix.begin(), prefix.end());
  Tensor a = RunDecoderA(enc, DecoderAInputFull(prev));
  Tensor last = SliceRows(a, a.rows() - 1, 1);
  Tensor b = RunDecoderB(enc, last, a, a.rows() - 1);
  return LogSoftmaxRow(Linear(b, replacement_w_, replacement_b_));
}

std::vector<double> EditModel::FullSequenceStep(
    const EncodedSource& enc, std::span<const TokenId> prefix) const {
  return ExpVector(FullSequenceLogProbs(enc, prefix));
}

// ---------------------------------------------------------------------------
// Losses

EditModel::EditLogits EditModel::TeacherForcedLogits(
    const SourceSequence& src, const EditSequence& gold) const {
  CheckMode(ModelMode::kEdit, "teacher forcing");
  ValidationReport report = Validate(gold, src.length());
  if (!report.valid()) throw InvalidEditsError(report.violations.front());
  const auto& ops = gold.ops;
  EditLogits out;
  std::vector<int> spans;
  for (std::size_t i = 0; i < ops.size(); ++i) {
    if (ops[i].span_end < 1) {
      throw DataError("op " + std::to_string(i + 1) +
                      ": span end 0 cannot be predicted by the pointer; "
                      "anchor leading insertions first");
    }
    if (ops[i].tag >= config_.tagset_size) {
      throw DataError("op " + std::to_string(i + 1) +
                      ": tag id outside the model tag set");
    }
    out.tag_targets.push_back(ops[i].tag);
    spans.push_back(ops[i].span_end);
    out.span_targets.push_back(ops[i].span_end - 1);
    out.replacement_targets.push_back(
        ReplacementClass(ops[i].replacement, config_.vocab_size));
  }

  EncodedSource enc = EncodeGraph(src);
  auto history = TeacherFeedback(ops);
  Tensor a = RunDecoderA(enc, DecoderAInputEdit(enc, history));
  out.tag = Linear(a, tag_w_, tag_b_);
  out.span = SpanLogits(enc, a, out.tag_targets);
  Tensor b = RunDecoderB(enc, BInputEdit(enc, a, out.tag_targets, spans), a, 0);
  out.replacement = Linear(b, replacement_w_, replacement_b_);
  return out;
}

Tensor EditModel::EditLossGraph(const SourceSequence& src,
                                const EditSequence& gold,
                                LossBreakdown* breakdown) const {
  EditLogits logits = TeacherForcedLogits(src, gold);
  Tensor tag_ce = CrossEntropy(logits.tag, logits.tag_targets);
  Tensor span_ce = CrossEntropy(logits.span, logits.span_targets);
  Tensor repl_ce = CrossEntropy(logits.replacement, logits.replacement_targets);
  Tensor total = Sum3(tag_ce, span_ce, repl_ce);
  if (breakdown != nullptr) {
    breakdown->tag_ce = tag_ce.scalar();
    breakdown->span_ce = span_ce.scalar();
    breakdown->replacement_ce = repl_ce.scalar();
    breakdown->total = total.scalar();
  }
  return total;
}

std::vector<StepLogProbs> EditModel::TeacherForcedLogProbs(
    const SourceSequence& src, const EditSequence& gold) const {
  autodiff::NoGradGuard no_grad;
  EditLogits logits = TeacherForcedLogits(src, gold);
  const Matrix tag = autodiff::LogSoftmax(logits.tag.value());
  const Matrix span = autodiff::LogSoftmax(logits.span.value());
  const Matrix repl = autodiff::LogSoftmax(logits.replacement.value());
  std::vector<StepLogProbs> out(gold.ops.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].tag = tag(i, logits.tag_targets[i]);
    out[i].span = span(i, logits.span_targets[i]);
    out[i].replacement = repl(i, logits.replacement_targets[i]);
  }
  return out;
}

Tensor EditModel::FullSequenceLossGraph(const SourceSequence& src,
                                        const TargetSequence& tgt,
                                        LossBreakdown* breakdown) const {
  CheckMode(ModelMode::kFullSequence, "FullSequenceLossGraph");
  std::vector<TokenId> prev = {kPadId};
  std::vector<int> targets;
  for (TokenId t : tgt.tokens) {
    if (t < 0 || t >= config_.vocab_size) {
      throw DataError("target token id outside the model vocabulary");
    }
    prev.push_back(t);
    targets.push_back(t);
  }
  targets.push_back(kEosId);
  EncodedSource enc = EncodeGraph(src);
  Tensor a = RunDecoderA(enc, DecoderAInputFull(prev));
  Tensor b = RunDecoderB(enc, a, a, 0);
  Tensor ce = CrossEntropy(Linear(b, replacement_w_, replacement_b_), targets);
  if (breakdown != nullptr) {
    *breakdown = {0.0, 0.0, ce.scalar(), ce.scalar()};
  }
  return ce;
}

LossBreakdown EditModel::TeacherForcedLoss(const SourceSequence& src,
                                           const EditSequence& gold) const {
  autodiff::NoGradGuard no_grad;
  LossBreakdown out;
  EditLossGraph(src, gold, &out);
  return out;
}

LossBreakdown EditModel::FullSequenceLoss(const SourceSequence& src,
                                          const TargetSequence& tgt) const {
  autodiff::NoGradGuard no_grad;
  LossBreakdown out;
  FullSequenceLossGraph(src, tgt, &out);
  return out;
}

}  // namespace spanedit
