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

// Edit algebra: applying, validating, extracting and summarising span-based
// edit sequences. Everything here is a pure function.

#ifndef SPANEDIT_EDITOPS_H_
#define SPANEDIT_EDITOPS_H_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spanedit/core.h"

namespace spanedit {

enum class ViolationKind {
  kEmpty,               // no ops at all
  kSpanOutOfRange,      // span end < 0 or > I
  kNonMonotonic,        // p_n < p_{n-1}
  kFinalSpanNotEnd,     // p_N != I
  kMissingEos,          // last op is not (EOS, I, EOS)
  kEarlyEos,            // EOS op before the last position
  kSelfMismatch,        // SELF tag without SELF replacement or vice versa
  kBadReplacement,      // EOS replacement on a non-EOS op, or EOS op without it
};

struct Violation {
  int op_index = 0;  // zero-based
  ViolationKind kind = ViolationKind::kEmpty;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool valid() const { return violations.empty(); }
  // Human-readable list, one clause per line.
  std::string ToString() const;
};

// Raised by ApplyEdits on invalid input; carries the first violation.
class InvalidEditsError : public DataError {
 public:
  explicit InvalidEditsError(Violation v);
  const Violation& violation() const { return violation_; }

 private:
  Violation violation_;
};

// Checks p_N = I, monotone spans, the trailing EOS op, and the SELF
// replacement pairing. Every violated clause is reported.
ValidationReport Validate(const EditSequence& edits, int source_len);

// Replays the edits over `src`: SELF copies x over (p_{n-1}, p_n], other ops
// append their replacement unless it is DEL, the EOS op appends nothing.
// Throws InvalidEditsError when Validate() fails.
TargetSequence ApplyEdits(const SourceSequence& src, const EditSequence& edits);

enum class AlignKind { kKeep, kSubstitute, kDelete, kInsert };

struct AlignmentOp {
  AlignKind kind = AlignKind::kKeep;
  // Source index (zero-based) of the consumed token; for inserts, the
  // number of source tokens consumed before the insertion.
  int source_pos = 0;
  std::vector<TokenId> target_tokens;

  bool operator==(const AlignmentOp&) const = default;
};

// Minimum edit distance alignment with unit costs. Ties prefer
// keep > substitute > delete > insert, resolved left to right.
std::vector<AlignmentOp> Align(std::span<const TokenId> src,
                               std::span<const TokenId> tgt);

// Number of non-keep operations in an alignment.
int AlignmentCost(std::span<const AlignmentOp> alignment);

// Converts a parallel pair into a compact span-level edit sequence. Runs of
// keeps become one SELF op; each maximal changed region becomes a group whose
// first op consumes the whole source span. `region_tags`, when present, must
// hold one tag per changed region; otherwise NON_SELF is used.
EditSequence ExtractEdits(const SourceSequence& src, const TargetSequence& tgt,
                          const std::optional<std::vector<TagId>>& region_tags,
                          const TagSet& tagset);

// Number of changed regions ExtractEdits would produce for the pair.
int CountChangedRegions(std::span<const TokenId> src,
                        std::span<const TokenId> tgt);

// Rewrites a leading pure insertion (ops with span end 0) so that the group
// also consumes and re-emits x_1. The target is unchanged; afterwards every
// non-EOS op has span end >= 1.
EditSequence AnchorLeadingInsertions(const SourceSequence& src,
                                     const EditSequence& edits);

// A maximal run of non-SELF, non-EOS ops covering source (start, end].
struct SpanGroup {
  int start = 0;
  int end = 0;
  TagId tag = kSelfTag;  // tag of the group's first op
  std::vector<TokenId> replacement;  // emitted tokens, DEL dropped

  bool operator==(const SpanGroup&) const = default;
};

std::vector<SpanGroup> SpanGroups(const EditSequence& edits);

struct CorpusStats {
  long sentence_count = 0;
  double avg_source_len = 0;
  double avg_target_len = 0;
  double avg_edit_count = 0;
  double changed_token_fraction = 0;
};

// Exact integer sums; Merge() is associative and commutative, so partial
// accumulators may be combined in any order.
class CorpusStatsAccumulator {
 public:
  void Add(const SourceSequence& src, const TargetSequence& tgt);
  void Merge(const CorpusStatsAccumulator& other);
  // Throws DataError for an empty corpus.
  CorpusStats Finish() const;

 private:
  long sentences_ = 0;
  long source_tokens_ = 0;
  long target_tokens_ = 0;
  long edit_ops_ = 0;
  long changed_source_tokens_ = 0;
};

struct ParallelPair {
  SourceSequence src;
  TargetSequence tgt;
};

CorpusStats ComputeCorpusStats(std::span<const ParallelPair> pairs);

}  // namespace spanedit

#endif  // SPANEDIT_EDITOPS_H_
