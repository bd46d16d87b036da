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

#include "spanedit/trainer.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "spanedit/editops.h"

namespace spanedit {

TrainExample MakeExample(const SourceSequence& src, const TargetSequence& tgt,
                         const std::optional<std::vector<TagId>>& region_tags,
                         const TagSet& tagset) {
  EditSequence edits = ExtractEdits(src, tgt, region_tags, tagset);
  return {src, AnchorLeadingInsertions(src, edits), tgt};
}

void OptimizerConfig::Validate() const {
  if (!(learning_rate > 0)) {
    throw std::invalid_argument("learning_rate must be positive");
  }
  if (beta1 < 0 || beta1 >= 1 || beta2 < 0 || beta2 >= 1) {
    throw std::invalid_argument("Adam betas must lie in [0, 1)");
  }
  if (!(epsilon > 0)) throw std::invalid_argument("epsilon must be positive");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (clip_norm < 0) throw std::invalid_argument("clip_norm must be >= 0");
}

Trainer::Trainer(EditModel& model, std::vector<TrainExample> corpus,
                 OptimizerConfig optimizer, std::uint64_t seed)
    : model_(model),
      corpus_(std::move(corpus)),
      optimizer_(optimizer),
      rng_(seed) {
  if (corpus_.empty()) throw DataError("training corpus is empty");
  optimizer_.Validate();
  for (const auto& p : model_.parameters()) {
    m_.push_back(autodiff::Matrix::Zero(p.tensor.rows(), p.tensor.cols()));
    v_.push_back(autodiff::Matrix::Zero(p.tensor.rows(), p.tensor.cols()));
  }
}

std::vector<std::size_t> Trainer::NextBatch() {
  std::vector<std::size_t> batch;
  const std::size_t size =
      std::min<std::size_t>(optimizer_.batch_size, corpus_.size());
  while (batch.size() < size) {
    if (cursor_ == order_.size()) {
      order_.resize(corpus_.size());
      for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = i;
      std::shuffle(order_.begin(), order_.end(), rng_);
      cursor_ = 0;
    }
    batch.push_back(order_[cursor_++]);
  }
  return batch;
}

StepRecord Trainer::Step() {
  ++step_;
  auto& params = model_.parameters();
  for (auto& p : params) p.tensor.ZeroGrad();

  const auto batch = NextBatch();
  const double weight = 1.0 / static_cast<double>(batch.size());
  StepRecord record;
  record.step = step_;
  const bool edit = model_.config().mode == ModelMode::kEdit;
  for (std::size_t idx : batch) {
    const TrainExample& ex = corpus_[idx];
    LossBreakdown lb;
    autodiff::Tensor loss =
        edit ? model_.EditLossGraph(ex.source, ex.edits, &lb)
             : model_.FullSequenceLossGraph(ex.source, ex.target, &lb);
    if (!std::isfinite(lb.total)) {
      throw NumericalError("step " + std::to_string(step_) +
                           ": non-finite loss on example " +
                           std::to_string(idx));
    }
    loss.Backward(weight);
    record.loss.tag_ce += weight * lb.tag_ce;
    record.loss.span_ce += weight * lb.span_ce;
    record.loss.replacement_ce += weight * lb.replacement_ce;
  }
  record.loss.total =
      record.loss.tag_ce + record.loss.span_ce + record.loss.replacement_ce;

  double scale = 1.0;
  if (optimizer_.clip_norm > 0) {
    double sq = 0;
    for (const auto& p : params) sq += p.tensor.grad().squaredNorm();
    const double norm = std::sqrt(sq);
    if (norm > optimizer_.clip_norm) scale = optimizer_.clip_norm / norm;
  }

  const double b1 = optimizer_.beta1, b2 = optimizer_.beta2;
  const double c1 = 1.0 - std::pow(b1, step_);
  const double c2 = 1.0 - std::pow(b2, step_);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const autodiff::Matrix g = params[i].tensor.grad() * scale;
    m_[i] = b1 * m_[i] + (1.0 - b1) * g;
    v_[i] = b2 * v_[i] + (1.0 - b2) * g.cwiseProduct(g);
    auto& w = params[i].tensor.mutable_value();
    w.array() -= optimizer_.learning_rate * (m_[i].array() / c1) /
                 ((v_[i].array() / c2).sqrt() + optimizer_.epsilon);
    params[i].tensor.ZeroGrad();
  }
  if (!model_.AllFinite()) {
    throw NumericalError("step " + std::to_string(step_) +
                         ": parameters became non-finite");
  }
  return record;
}

std::vector<StepRecord> Trainer::Run(
    int steps, const std::function<void(const StepRecord&)>& on_step) {
  if (steps < 0) throw std::invalid_argument("steps must be >= 0");
  std::vector<StepRecord> records;
  records.reserve(steps);
  for (int i = 0; i < steps; ++i) {
    records.push_back(Step());
    if (on_step) on_step(records.back());
  }
  return records;
}

void WriteLossCsv(std::ostream& out, const std::vector<StepRecord>& records) {
  out << "step,tag_ce,span_ce,replacement_ce,total\n";
  char buf[160];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.17g\n", r.step,
                  r.loss.tag_ce, r.loss.span_ce, r.loss.replacement_ce,
                  r.loss.total);
    out << buf;
  }
}

}  // namespace spanedit
