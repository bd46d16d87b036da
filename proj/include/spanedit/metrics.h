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

// Evaluation measures: sentence error rate, exact match, SARI and
// span-level precision/recall/F-beta.

#ifndef SPANEDIT_METRICS_H_
#define SPANEDIT_METRICS_H_

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "spanedit/core.h"

namespace spanedit {

using Sentence = std::vector<std::string>;

// Fraction of positions where the hypothesis differs from the reference.
// Throws std::invalid_argument on empty or mismatched inputs.
template <typename Seq>
double SentenceErrorRate(std::span<const Seq> hyps, std::span<const Seq> refs) {
  if (hyps.size() != refs.size()) {
    throw std::invalid_argument("hypothesis and reference counts differ: " +
                                std::to_string(hyps.size()) + " vs " +
                                std::to_string(refs.size()));
  }
  if (hyps.empty()) throw std::invalid_argument("empty corpus");
  std::size_t errors = 0;
  for (std::size_t i = 0; i < hyps.size(); ++i) errors += !(hyps[i] == refs[i]);
  return static_cast<double>(errors) / static_cast<double>(hyps.size());
}

template <typename Seq>
double ExactMatch(std::span<const Seq> hyps, std::span<const Seq> refs) {
  return 1.0 - SentenceErrorRate(hyps, refs);
}

// SARI components of one sentence, each averaged over n-gram orders 1..4.
struct SariBreakdown {
  double add_f1 = 0;
  double keep_f1 = 0;
  double delete_precision = 0;
  double score = 0;  // mean of the three, in [0, 1]
};

// Per-sentence SARI. References are pooled as multisets; source and
// hypothesis counts are scaled by the number of references. Any precision
// or recall over an empty n-gram set is 1. Throws std::invalid_argument
// when `refs` is empty.
SariBreakdown SentenceSari(const Sentence& source, const Sentence& hyp,
                           std::span<const Sentence> refs);

// Corpus SARI in [0, 100]: the mean sentence score times 100.
double Sari(std::span<const Sentence> sources, std::span<const Sentence> hyps,
            std::span<const std::vector<Sentence>> ref_sets);

struct SpanMatchReport {
  long true_positives = 0;
  long hyp_count = 0;
  long gold_count = 0;
  double precision = 0;
  double recall = 0;
  double f_beta = 0;
};

// Fills precision, recall and f_beta from the three counts.
SpanMatchReport FinishReport(long true_positives, long hyp_count,
                             long gold_count, double beta);

// Span groups match when start, end and emitted tokens agree. Throws
// DataError if the two sequences describe different source lengths.
SpanMatchReport SpanPrf(const EditSequence& hyp, const EditSequence& gold,
                        double beta = 0.5);

// Span groups match when start, end and tag agree. With `project_spans`,
// each hypothesis group first takes the span of the gold group it overlaps
// most.
SpanMatchReport TaggingPrf(const EditSequence& hyp, const EditSequence& gold,
                           double beta = 0.5, bool project_spans = false);

// Corpus-level versions: counts are summed before computing the ratios.
SpanMatchReport CorpusSpanPrf(std::span<const EditSequence> hyps,
                              std::span<const EditSequence> golds,
                              double beta = 0.5);
SpanMatchReport CorpusTaggingPrf(std::span<const EditSequence> hyps,
                                 std::span<const EditSequence> golds,
                                 double beta = 0.5, bool project_spans = false);

}  // namespace spanedit

#endif  // SPANEDIT_METRICS_H_
