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

// Decode-speed comparison of an edit model against a full-sequence model,
// bucketed by gold edit count.

#ifndef SPANEDIT_BENCH_H_
#define SPANEDIT_BENCH_H_

#include <ostream>
#include <string>
#include <vector>

#include "spanedit/core.h"
#include "spanedit/decoder.h"
#include "spanedit/model.h"

namespace spanedit {

// Gold edit count N counts ops before EOS, SELF included.
struct BenchBucket {
  std::string label;
  int min_edits = 0;
  int max_edits = 0;  // inclusive; negative means unbounded
};

// N <= 3, 4-6, 7-10, > 10.
std::vector<BenchBucket> DefaultBenchBuckets();
// Parses "3,6,10" into the buckets <=3, 4-6, 7-10, >10. Throws
// std::invalid_argument for non-increasing or non-positive edges.
std::vector<BenchBucket> BucketsFromEdges(const std::string& edges);

struct BenchItem {
  SourceSequence source;
  int gold_edits = 0;
  int target_length = 0;
};

struct BenchRow {
  std::string label;
  int sentences = 0;
  double avg_source_length = 0;
  double avg_edit_count = 0;
  double avg_target_length = 0;
  // Sentences per second, averaged over repetitions.
  double edit_rate = 0;
  double shortcut_rate = 0;
  double fullseq_rate = 0;
  double speedup = 0;           // edit_rate / fullseq_rate
  double shortcut_speedup = 0;  // shortcut_rate / fullseq_rate
  // Model sub-step evaluations per sentence (one repetition).
  double edit_evaluations = 0;
  double shortcut_evaluations = 0;
  double fullseq_evaluations = 0;
  int failures = 0;  // searches that ended without a finished hypothesis
};

struct BenchReport {
  std::vector<BenchRow> rows;
  int repetitions = 0;
  std::vector<std::string> warnings;  // skipped buckets

  std::string ToJson() const;
  void PrintTable(std::ostream& out) const;
};

// Times single-pass decoding of every item in each mode. Only the decode
// calls are inside the clock. `params.shortcuts` is overridden per column
// and refinement is disabled. Throws std::invalid_argument if the model
// modes are wrong or `repetitions` < 1.
BenchReport RunBench(const EditModel& edit_model,
                     const EditModel& fullseq_model,
                     const std::vector<BenchItem>& items,
                     const std::vector<BenchBucket>& buckets,
                     const DecodeParams& params, int repetitions);

}  // namespace spanedit

#endif  // SPANEDIT_BENCH_H_
