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

#include "spanedit/editops.h"

#include <algorithm>
#include <sstream>

namespace spanedit {
namespace {

std::string OpName(int op_index) {
  return "op " + std::to_string(op_index + 1);
}

// Changed region of an alignment: source tokens (src_begin, src_end] are
// replaced by `tokens`.
struct Region {
  bool changed = false;
  int src_begin = 0;
  int src_end = 0;
  std::vector<TokenId> tokens;
};

std::vector<Region> Regions(std::span<const AlignmentOp> alignment) {
  std::vector<Region> regions;
  int pos = 0;
  for (const auto& a : alignment) {
    bool changed = a.kind != AlignKind::kKeep;
    if (regions.empty() || regions.back().changed != changed) {
      regions.push_back({changed, pos, pos, {}});
    }
    Region& r = regions.back();
    if (a.kind != AlignKind::kInsert) ++pos;
    r.src_end = pos;
    if (changed) {
      r.tokens.insert(r.tokens.end(), a.target_tokens.begin(),
                      a.target_tokens.end());
    }
  }
  return regions;
}

}  // namespace

std::string ValidationReport::ToString() const {
  std::ostringstream out;
  for (const auto& v : violations) out << v.message << '\n';
  return out.str();
}

InvalidEditsError::InvalidEditsError(Violation v)
    : DataError("invalid edit sequence: " + v.message),
      violation_(std::move(v)) {}

ValidationReport Validate(const EditSequence& edits, int source_len) {
  ValidationReport report;
  auto add = [&](int i, ViolationKind kind, std::string msg) {
    report.violations.push_back({i, kind, std::move(msg)});
  };
  const auto& ops = edits.ops;
  if (ops.empty()) {
    add(0, ViolationKind::kEmpty, "empty edit sequence (p_N = I requires N >= 1)");
    return report;
  }
  const int n_ops = static_cast<int>(ops.size());
  for (int i = 0; i < n_ops; ++i) {
    const EditOp& op = ops[i];
    if (op.span_end < 0 || op.span_end > source_len) {
      add(i, ViolationKind::kSpanOutOfRange,
          OpName(i) + ": span end " + std::to_string(op.span_end) +
              " outside [0, " + std::to_string(source_len) + "]");
    }
    if (i > 0 && op.span_end < ops[i - 1].span_end) {
      add(i, ViolationKind::kNonMonotonic,
          OpName(i) + ": non-monotonic span end " +
              std::to_string(op.span_end) + " < " +
              std::to_string(ops[i - 1].span_end) +
              " (requires p_n <= p_{n+1})");
    }
    if (op.is_self() != (op.replacement == kSelfReplacement)) {
      add(i, ViolationKind::kSelfMismatch,
          OpName(i) + ": SELF tag and SELF replacement must occur together");
    }
    if (op.is_eos() && i + 1 < n_ops) {
      add(i, ViolationKind::kEarlyEos, OpName(i) + ": EOS before the last op");
    }
    if (op.is_eos() != (op.replacement == kEosId)) {
      add(i, ViolationKind::kBadReplacement,
          OpName(i) + ": EOS tag and EOS replacement must occur together");
    }
  }
  const EditOp& last = ops.back();
  if (last.span_end != source_len) {
    add(n_ops - 1, ViolationKind::kFinalSpanNotEnd,
        OpName(n_ops - 1) + ": p_N = " + std::to_string(last.span_end) +
            " != I = " + std::to_string(source_len) +
            " (the final span must end at the end of the source)");
  }
  if (!last.is_eos()) {
    add(n_ops - 1, ViolationKind::kMissingEos,
        OpName(n_ops - 1) + ": the last op must be (EOS, I, EOS)");
  }
  std::stable_sort(report.violations.begin(), report.violations.end(),
                   [](const Violation& a, const Violation& b) {
                     return a.op_index < b.op_index;
                   });
  return report;
}

TargetSequence ApplyEdits(const SourceSequence& src,
                          const EditSequence& edits) {
  ValidationReport report = Validate(edits, src.length());
  if (!report.valid()) throw InvalidEditsError(report.violations.front());

  TargetSequence out;
  int prev = 0;
  for (const EditOp& op : edits.ops) {
    if (op.is_self()) {
      for (int i = prev; i < op.span_end; ++i) out.tokens.push_back(src[i]);
    } else if (!op.is_eos() && op.replacement != kDelId) {
      out.tokens.push_back(op.replacement);
    }
    prev = op.span_end;
  }
  return out;
}

std::vector<AlignmentOp> Align(std::span<const TokenId> src,
                               std::span<const TokenId> tgt) {
  const int n = static_cast<int>(src.size());
  const int m = static_cast<int>(tgt.size());
  // suffix[i][j]: edit distance between src[i:] and tgt[j:].
  std::vector<int> suffix((n + 1) * (m + 1));
  auto at = [&](int i, int j) -> int& { return suffix[i * (m + 1) + j]; };
  for (int i = n; i >= 0; --i) {
    for (int j = m; j >= 0; --j) {
      if (i == n) {
        at(i, j) = m - j;
      } else if (j == m) {
        at(i, j) = n - i;
      } else {
        int diag = at(i + 1, j + 1) + (src[i] == tgt[j] ? 0 : 1);
        at(i, j) = std::min({diag, at(i + 1, j) + 1, at(i, j + 1) + 1});
      }
    }
  }

  std::vector<AlignmentOp> ops;
  int i = 0, j = 0;
  while (i < n || j < m) {
    const int here = at(i, j);
    if (i < n && j < m && src[i] == tgt[j] && at(i + 1, j + 1) == here) {
      ops.push_back({AlignKind::kKeep, i, {tgt[j]}});
      ++i, ++j;
    } else if (i < n && j < m && src[i] != tgt[j] &&
               at(i + 1, j + 1) + 1 == here) {
      ops.push_back({AlignKind::kSubstitute, i, {tgt[j]}});
      ++i, ++j;
    } else if (i < n && at(i + 1, j) + 1 == here) {
      ops.push_back({AlignKind::kDelete, i, {}});
      ++i;
    } else {
      ops.push_back({AlignKind::kInsert, i, {tgt[j]}});
      ++j;
    }
  }
  return ops;
}

int AlignmentCost(std::span<const AlignmentOp> alignment) {
  return static_cast<int>(
      std::count_if(alignment.begin(), alignment.end(),
                    [](const AlignmentOp& a) { return a.kind != AlignKind::kKeep; }));
}

int CountChangedRegions(std::span<const TokenId> src,
                        std::span<const TokenId> tgt) {
  auto regions = Regions(Align(src, tgt));
  return static_cast<int>(std::count_if(
      regions.begin(), regions.end(), [](const Region& r) { return r.changed; }));
}

EditSequence ExtractEdits(const SourceSequence& src, const TargetSequence& tgt,
                          const std::optional<std::vector<TagId>>& region_tags,
                          const TagSet& tagset) {
  auto regions = Regions(Align(src.tokens(), tgt.tokens));
  const int changed = static_cast<int>(std::count_if(
      regions.begin(), regions.end(), [](const Region& r) { return r.changed; }));
  TagId default_tag = kSelfTag;
  if (region_tags) {
    if (static_cast<int>(region_tags->size()) != changed) {
      throw DataError("tag annotations cover " +
                      std::to_string(region_tags->size()) +
                      " regions but the pair has " + std::to_string(changed) +
                      " changed regions");
    }
    for (TagId t : *region_tags) {
      if (t == kSelfTag || t == kEosTag || t < 0 ||
          t >= static_cast<TagId>(tagset.size())) {
        throw DataError("annotation tag id " + std::to_string(t) +
                        " is not a task tag of " + tagset.name());
      }
    }
  } else if (changed > 0) {
    default_tag = tagset.Lookup("NON_SELF");
  }

  EditSequence edits;
  edits.source_len = src.length();
  int group = 0;
  for (const Region& r : regions) {
    if (!r.changed) {
      edits.ops.push_back(SelfOp(r.src_end));
      continue;
    }
    TagId tag = region_tags ? (*region_tags)[group] : default_tag;
    ++group;
    if (r.tokens.empty()) {
      edits.ops.push_back({tag, r.src_end, kDelId});
      continue;
    }
    for (TokenId t : r.tokens) edits.ops.push_back({tag, r.src_end, t});
  }
  edits.ops.push_back(EosOp(src.length()));
  return edits;
}

EditSequence AnchorLeadingInsertions(const SourceSequence& src,
                                     const EditSequence& edits) {
  const auto& ops = edits.ops;
  std::size_t lead = 0;
  while (lead < ops.size() && !ops[lead].is_eos() && ops[lead].span_end == 0) {
    ++lead;
  }
  if (lead == 0 || lead == ops.size()) return edits;

  EditSequence out;
  out.source_len = edits.source_len;
  for (std::size_t k = 0; k < lead; ++k) {
    EditOp op = ops[k];
    op.span_end = 1;
    out.ops.push_back(op);
  }
  std::size_t rest = lead;
  if (ops[lead].is_self()) {
    out.ops.push_back({ops[0].tag, 1, src[0]});
    if (ops[lead].span_end == 1) ++rest;
  }
  out.ops.insert(out.ops.end(), ops.begin() + rest, ops.end());
  return out;
}

std::vector<SpanGroup> SpanGroups(const EditSequence& edits) {
  std::vector<SpanGroup> groups;
  int prev = 0;
  bool open = false;
  for (const EditOp& op : edits.ops) {
    if (op.is_self() || op.is_eos()) {
      open = false;
    } else {
      if (!open) {
        groups.push_back({prev, prev, op.tag, {}});
        open = true;
      }
      SpanGroup& g = groups.back();
      g.end = op.span_end;
      if (op.replacement != kDelId) g.replacement.push_back(op.replacement);
    }
    prev = op.span_end;
  }
  return groups;
}

void CorpusStatsAccumulator::Add(const SourceSequence& src,
                                 const TargetSequence& tgt) {
  static const TagSet kTrivial = BuiltinTagSet("trivial");
  auto alignment = Align(src.tokens(), tgt.tokens);
  ++sentences_;
  source_tokens_ += src.length();
  target_tokens_ += tgt.length();
  edit_ops_ += static_cast<long>(
      ExtractEdits(src, tgt, std::nullopt, kTrivial).ops.size());
  for (const auto& a : alignment) {
    if (a.kind == AlignKind::kSubstitute || a.kind == AlignKind::kDelete) {
      ++changed_source_tokens_;
    }
  }
}

void CorpusStatsAccumulator::Merge(const CorpusStatsAccumulator& other) {
  sentences_ += other.sentences_;
  source_tokens_ += other.source_tokens_;
  target_tokens_ += other.target_tokens_;
  edit_ops_ += other.edit_ops_;
  changed_source_tokens_ += other.changed_source_tokens_;
}

CorpusStats CorpusStatsAccumulator::Finish() const {
  if (sentences_ == 0) throw DataError("corpus statistics of an empty corpus");
  CorpusStats s;
  const double n = static_cast<double>(sentences_);
  s.sentence_count = sentences_;
  s.avg_source_len = source_tokens_ / n;
  s.avg_target_len = target_tokens_ / n;
  s.avg_edit_count = edit_ops_ / n;
  s.changed_token_fraction =
      static_cast<double>(changed_source_tokens_) / source_tokens_;
  return s;
}

CorpusStats ComputeCorpusStats(std::span<const ParallelPair> pairs) {
  CorpusStatsAccumulator acc;
  for (const auto& p : pairs) acc.Add(p.src, p.tgt);
  return acc.Finish();
}

}  // namespace spanedit
