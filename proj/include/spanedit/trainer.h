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

// Mini-batch training with Adam.

#ifndef SPANEDIT_TRAINER_H_
#define SPANEDIT_TRAINER_H_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <random>
#include <vector>

#include "spanedit/model.h"

namespace spanedit {

// One training pair. Edit-mode models read `edits`, full-sequence models
// read `target`.
struct TrainExample {
  SourceSequence source;
  EditSequence edits;
  TargetSequence target;
};

// Builds training examples from token-id pairs: extracts edits and anchors
// leading insertions so every span end is at least 1.
TrainExample MakeExample(const SourceSequence& src, const TargetSequence& tgt,
                         const std::optional<std::vector<TagId>>& region_tags,
                         const TagSet& tagset);

struct OptimizerConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int batch_size = 8;
  // Global gradient-norm clip; 0 disables.
  double clip_norm = 0;

  void Validate() const;
};

struct StepRecord {
  int step = 0;          // 1-based
  LossBreakdown loss;    // mean over the batch
};

class Trainer {
 public:
  // `model` must outlive the trainer. Throws DataError on an empty corpus.
  Trainer(EditModel& model, std::vector<TrainExample> corpus,
          OptimizerConfig optimizer, std::uint64_t seed);

  // One optimiser update over the next batch. Throws NumericalError naming
  // the step if the loss or the updated parameters are not finite.
  StepRecord Step();
  // `steps` updates; `on_step` (if set) sees every record.
  std::vector<StepRecord> Run(
      int steps, const std::function<void(const StepRecord&)>& on_step = {});

  int steps_done() const { return step_; }

 private:
  std::vector<std::size_t> NextBatch();

  EditModel& model_;
  std::vector<TrainExample> corpus_;
  OptimizerConfig optimizer_;
  std::mt19937_64 rng_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
  int step_ = 0;
  std::vector<autodiff::Matrix> m_, v_;
};

// step,tag_ce,span_ce,replacement_ce,total with round-trip precision.
void WriteLossCsv(std::ostream& out, const std::vector<StepRecord>& records);

}  // namespace spanedit

#endif  // SPANEDIT_TRAINER_H_
