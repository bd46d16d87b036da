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

#include "spanedit/metrics.h"

#include <algorithm>
#include <map>

#include "spanedit/editops.h"

namespace spanedit {
namespace {

constexpr int kMaxOrder = 4;

using NgramCounts = std::map<std::vector<std::string>, double>;

NgramCounts Ngrams(const Sentence& s, int n, double weight = 1.0) {
  NgramCounts out;
  for (std::size_t i = 0; i + n <= s.size(); ++i) {
    out[std::vector<std::string>(s.begin() + i, s.begin() + i + n)] += weight;
  }
  return out;
}

double Get(const NgramCounts& c, const std::vector<std::string>& g) {
  auto it = c.find(g);
  return it == c.end() ? 0.0 : it->second;
}

// Multiset intersection and difference; zero entries are dropped.
NgramCounts Min(const NgramCounts& a, const NgramCounts& b) {
  NgramCounts out;
  for (const auto& [g, v] : a) {
    const double m = std::min(v, Get(b, g));
    if (m > 0) out[g] = m;
  }
  return out;
}

NgramCounts Minus(const NgramCounts& a, const NgramCounts& b) {
  NgramCounts out;
  for (const auto& [g, v] : a) {
    const double d = v - Get(b, g);
    if (d > 0) out[g] = d;
  }
  return out;
}

double F1(double p, double r) { return p + r > 0 ? 2 * p * r / (p + r) : 0.0; }

struct OrderScores {
  double add_f1, keep_f1, del_p;
};

OrderScores ScoreOrder(const Sentence& source, const Sentence& hyp,
                       std::span<const Sentence> refs, int n) {
  const double r = static_cast<double>(refs.size());
  const NgramCounts s_rep = Ngrams(source, n, r);
  const NgramCounts c_rep = Ngrams(hyp, n, r);
  NgramCounts refs_all;
  for (const auto& ref : refs) {
    for (const auto& [g, v] : Ngrams(ref, n)) refs_all[g] += v;
  }

  // Additions are scored on n-gram types.
  long added = 0, added_good = 0, addable = 0;
  for (const auto& [g, v] : c_rep) {
    if (Get(s_rep, g) == 0) {
      ++added;
      added_good += Get(refs_all, g) > 0;
    }
  }
  for (const auto& [g, v] : refs_all) addable += Get(s_rep, g) == 0;
  const double add_p = added > 0 ? double(added_good) / double(added) : 1.0;
  const double add_r = addable > 0 ? double(added_good) / double(addable) : 1.0;

  const NgramCounts keep = Min(s_rep, c_rep);
  const NgramCounts keep_good = Min(keep, refs_all);
  const NgramCounts keep_all = Min(s_rep, refs_all);
  double keep_p = 1.0, keep_r = 1.0;
  if (!keep.empty()) {
    double sum = 0;
    for (const auto& [g, v] : keep) sum += Get(keep_good, g) / v;
    keep_p = sum / static_cast<double>(keep.size());
  }
  if (!keep_all.empty()) {
    double sum = 0;
    for (const auto& [g, v] : keep_all) sum += Get(keep_good, g) / v;
    keep_r = sum / static_cast<double>(keep_all.size());
  }

  const NgramCounts del = Minus(s_rep, c_rep);
  const NgramCounts del_good = Minus(del, refs_all);
  double del_p = 1.0;
  if (!del.empty()) {
    double sum = 0;
    for (const auto& [g, v] : del) sum += Get(del_good, g) / v;
    del_p = sum / static_cast<double>(del.size());
  }
  return {F1(add_p, add_r), F1(keep_p, keep_r), del_p};
}

double Ratio(long num, long den, long other) {
  if (den > 0) return static_cast<double>(num) / static_cast<double>(den);
  return other == 0 ? 1.0 : 0.0;
}

// One-to-one matching count between two group lists under `same`.
template <typename Same>
long CountMatches(const std::vector<SpanGroup>& hyp,
                  const std::vector<SpanGroup>& gold, Same same) {
  std::vector<bool> used(gold.size(), false);
  long tp = 0;
  for (const auto& h : hyp) {
    for (std::size_t j = 0; j < gold.size(); ++j) {
      if (!used[j] && same(h, gold[j])) {
        used[j] = true;
        ++tp;
        break;
      }
    }
  }
  return tp;
}

void CheckSameSource(const EditSequence& hyp, const EditSequence& gold) {
  if (hyp.source_len != gold.source_len) {
    throw DataError("edit sequences describe sources of length " +
                    std::to_string(hyp.source_len) + " and " +
                    std::to_string(gold.source_len));
  }
}

// Moves each hypothesis group onto the gold span it overlaps most. An
// insertion group only overlaps an identical span.
std::vector<SpanGroup> Project(std::vector<SpanGroup> hyp,
                               const std::vector<SpanGroup>& gold) {
  for (auto& h : hyp) {
    int best = -1, best_overlap = 0;
    for (std::size_t j = 0; j < gold.size(); ++j) {
      const auto& g = gold[j];
      int overlap = std::min(h.end, g.end) - std::max(h.start, g.start);
      if (h.start == g.start && h.end == g.end) overlap = std::max(overlap, 1);
      if (overlap > best_overlap) {
        best = static_cast<int>(j);
        best_overlap = overlap;
      }
    }
    if (best >= 0) {
      h.start = gold[best].start;
      h.end = gold[best].end;
    }
  }
  return hyp;
}

struct Counts {
  long tp = 0, hyp = 0, gold = 0;
};

Counts SpanCounts(const EditSequence& hyp, const EditSequence& gold) {
  CheckSameSource(hyp, gold);
  const auto h = SpanGroups(hyp), g = SpanGroups(gold);
  const long tp = CountMatches(h, g, [](const SpanGroup& a, const SpanGroup& b) {
    return a.start == b.start && a.end == b.end &&
           a.replacement == b.replacement;
  });
  return {tp, static_cast<long>(h.size()), static_cast<long>(g.size())};
}

Counts TagCounts(const EditSequence& hyp, const EditSequence& gold,
                 bool project) {
  CheckSameSource(hyp, gold);
  const auto g = SpanGroups(gold);
  auto h = SpanGroups(hyp);
  if (project) h = Project(std::move(h), g);
  const long tp = CountMatches(h, g, [](const SpanGroup& a, const SpanGroup& b) {
    return a.start == b.start && a.end == b.end && a.tag == b.tag;
  });
  return {tp, static_cast<long>(h.size()), static_cast<long>(g.size())};
}

void CheckCorpus(std::size_t hyps, std::size_t golds) {
  if (hyps != golds) {
    throw std::invalid_argument("hypothesis and gold counts differ: " +
                                std::to_string(hyps) + " vs " +
                                std::to_string(golds));
  }
}

}  // namespace

SariBreakdown SentenceSari(const Sentence& source, const Sentence& hyp,
                           std::span<const Sentence> refs) {
  if (refs.empty()) throw std::invalid_argument("SARI needs a reference");
  SariBreakdown out;
  for (int n = 1; n <= kMaxOrder; ++n) {
    const OrderScores s = ScoreOrder(source, hyp, refs, n);
    out.add_f1 += s.add_f1 / kMaxOrder;
    out.keep_f1 += s.keep_f1 / kMaxOrder;
    out.delete_precision += s.del_p / kMaxOrder;
  }
  out.score = (out.add_f1 + out.keep_f1 + out.delete_precision) / 3.0;
  return out;
}

double Sari(std::span<const Sentence> sources, std::span<const Sentence> hyps,
            std::span<const std::vector<Sentence>> ref_sets) {
  if (sources.size() != hyps.size() || sources.size() != ref_sets.size()) {
    throw std::invalid_argument(
        "SARI needs equally many sources, hypotheses and reference sets");
  }
  if (sources.empty()) throw std::invalid_argument("empty corpus");
  double total = 0;
  for (std::size_t i = 0; i < sources.size(); ++i) {
    if (ref_sets[i].empty()) {
      throw std::invalid_argument("sentence " + std::to_string(i + 1) +
                                  " has no reference");
    }
    total += SentenceSari(sources[i], hyps[i], ref_sets[i]).score;
  }
  return 100.0 * total / static_cast<double>(sources.size());
}

SpanMatchReport FinishReport(long true_positives, long hyp_count,
                             long gold_count, double beta) {
  SpanMatchReport r;
  r.true_positives = true_positives;
  r.hyp_count = hyp_count;
  r.gold_count = gold_count;
  r.precision = Ratio(true_positives, hyp_count, gold_count);
  r.recall = Ratio(true_positives, gold_count, hyp_count);
  const double b2 = beta * beta;
  const double den = b2 * r.precision + r.recall;
  r.f_beta = den > 0 ? (1 + b2) * r.precision * r.recall / den : 0.0;
  return r;
}

SpanMatchReport SpanPrf(const EditSequence& hyp, const EditSequence& gold,
                        double beta) {
  const Counts c = SpanCounts(hyp, gold);
  return FinishReport(c.tp, c.hyp, c.gold, beta);
}

SpanMatchReport TaggingPrf(const EditSequence& hyp, const EditSequence& gold,
                           double beta, bool project_spans) {
  const Counts c = TagCounts(hyp, gold, project_spans);
  return FinishReport(c.tp, c.hyp, c.gold, beta);
}

SpanMatchReport CorpusSpanPrf(std::span<const EditSequence> hyps,
                              std::span<const EditSequence> golds,
                              double beta) {
  CheckCorpus(hyps.size(), golds.size());
  Counts total;
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    const Counts c = SpanCounts(hyps[i], golds[i]);
    total.tp += c.tp;
    total.hyp += c.hyp;
    total.gold += c.gold;
  }
  return FinishReport(total.tp, total.hyp, total.gold, beta);
}

SpanMatchReport CorpusTaggingPrf(std::span<const EditSequence> hyps,
                                 std::span<const EditSequence> golds,
                                 double beta, bool project_spans) {
  CheckCorpus(hyps.size(), golds.size());
  Counts total;
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    const Counts c = TagCounts(hyps[i], golds[i], project_spans);
    total.tp += c.tp;
    total.hyp += c.hyp;
    total.gold += c.gold;
  }
  return FinishReport(total.tp, total.hyp, total.gold, beta);
}

}  // namespace spanedit
