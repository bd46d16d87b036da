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

#include "spanedit/bench.h"

#include <chrono>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace spanedit {
namespace {

using Clock = std::chrono::steady_clock;

bool InBucket(const BenchBucket& b, int n) {
  return n >= b.min_edits && (b.max_edits < 0 || n <= b.max_edits);
}

struct ModeRun {
  double seconds = 0;
  DecodeStats stats;
  int failures = 0;
};

template <typename DecodeFn>
ModeRun TimeMode(const std::vector<const BenchItem*>& items, DecodeFn decode) {
  ModeRun run;
  for (const BenchItem* item : items) {
    DecodeStats stats;
    const auto start = Clock::now();
    try {
      decode(item->source, &stats);
    } catch (const SearchError&) {
      ++run.failures;
    }
    run.seconds += std::chrono::duration<double>(Clock::now() - start).count();
    run.stats += stats;
  }
  return run;
}

std::string Format(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return buf;
}

}  // namespace

std::vector<BenchBucket> DefaultBenchBuckets() {
  return BucketsFromEdges("3,6,10");
}

std::vector<BenchBucket> BucketsFromEdges(const std::string& edges) {
  std::vector<int> values;
  std::stringstream in(edges);
  std::string field;
  while (std::getline(in, field, ',')) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(field, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != field.size()) {
      throw std::invalid_argument("bad bucket edge '" + field + "'");
    }
    if (v < 1 || (!values.empty() && v <= values.back())) {
      throw std::invalid_argument(
          "bucket edges must be positive and increasing: " + edges);
    }
    values.push_back(v);
  }
  if (values.empty()) throw std::invalid_argument("no bucket edges given");
  std::vector<BenchBucket> out;
  int lo = 0;
  for (int v : values) {
    const std::string label = lo == 0 ? "N<=" + std::to_string(v)
                                      : std::to_string(lo) + "-" +
                                            std::to_string(v);
    out.push_back({label, lo, v});
    lo = v + 1;
  }
  out.push_back({"N>" + std::to_string(values.back()), lo, -1});
  return out;
}

BenchReport RunBench(const EditModel& edit_model,
                     const EditModel& fullseq_model,
                     const std::vector<BenchItem>& items,
                     const std::vector<BenchBucket>& buckets,
                     const DecodeParams& params, int repetitions) {
  if (edit_model.config().mode != ModelMode::kEdit) {
    throw std::invalid_argument("bench: first model must be an edit model");
  }
  if (fullseq_model.config().mode != ModelMode::kFullSequence) {
    throw std::invalid_argument(
        "bench: second model must be a full-sequence model");
  }
  if (repetitions < 1) throw std::invalid_argument("repetitions must be >= 1");

  DecodeParams plain = params;
  plain.refinement_passes = 1;
  plain.shortcuts = false;
  DecodeParams fast = plain;
  fast.shortcuts = true;
  plain.Validate();

  BenchReport report;
  report.repetitions = repetitions;
  for (const BenchBucket& bucket : buckets) {
    std::vector<const BenchItem*> members;
    for (const BenchItem& item : items) {
      if (InBucket(bucket, item.gold_edits)) members.push_back(&item);
    }
    if (members.empty()) {
      report.warnings.push_back("bucket " + bucket.label +
                                " has no sentences; skipped");
      continue;
    }
    BenchRow row;
    row.label = bucket.label;
    row.sentences = static_cast<int>(members.size());
    for (const BenchItem* m : members) {
      row.avg_source_length += m->source.length();
      row.avg_edit_count += m->gold_edits;
      row.avg_target_length += m->target_length;
    }
    const double count = static_cast<double>(members.size());
    row.avg_source_length /= count;
    row.avg_edit_count /= count;
    row.avg_target_length /= count;

    double edit_s = 0, fast_s = 0, full_s = 0;
    for (int rep = 0; rep < repetitions; ++rep) {
      const ModeRun e = TimeMode(members, [&](const SourceSequence& s,
                                              DecodeStats* st) {
        BeamDecode(edit_model, s, plain, st);
      });
      const ModeRun f = TimeMode(members, [&](const SourceSequence& s,
                                              DecodeStats* st) {
        BeamDecode(edit_model, s, fast, st);
      });
      const ModeRun q = TimeMode(members, [&](const SourceSequence& s,
                                              DecodeStats* st) {
        FullSequenceDecode(fullseq_model, s, plain, st);
      });
      edit_s += e.seconds;
      fast_s += f.seconds;
      full_s += q.seconds;
      if (rep == 0) {
        row.edit_evaluations = e.stats.total() / count;
        row.shortcut_evaluations = f.stats.total() / count;
        row.fullseq_evaluations = q.stats.total() / count;
        row.failures = e.failures + f.failures + q.failures;
      }
    }
    // Mean time per repetition, as a rate.
    row.edit_rate = count * repetitions / edit_s;
    row.shortcut_rate = count * repetitions / fast_s;
    row.fullseq_rate = count * repetitions / full_s;
    row.speedup = row.edit_rate / row.fullseq_rate;
    row.shortcut_speedup = row.shortcut_rate / row.fullseq_rate;
    report.rows.push_back(row);
  }
  return report;
}

std::string BenchReport::ToJson() const {
  nlohmann::json rows_json = nlohmann::json::array();
  for (const BenchRow& r : rows) {
    rows_json.push_back({{"bucket", r.label},
                         {"sentences", r.sentences},
                         {"avg_source_length", r.avg_source_length},
                         {"avg_edit_count", r.avg_edit_count},
                         {"avg_target_length", r.avg_target_length},
                         {"edit_sentences_per_sec", r.edit_rate},
                         {"shortcut_sentences_per_sec", r.shortcut_rate},
                         {"fullseq_sentences_per_sec", r.fullseq_rate},
                         {"speedup", r.speedup},
                         {"shortcut_speedup", r.shortcut_speedup},
                         {"edit_evaluations", r.edit_evaluations},
                         {"shortcut_evaluations", r.shortcut_evaluations},
                         {"fullseq_evaluations", r.fullseq_evaluations},
                         {"failures", r.failures}});
  }
  nlohmann::json out = {{"repetitions", repetitions},
                        {"rows", rows_json},
                        {"warnings", warnings}};
  return out.dump(2);
}

void BenchReport::PrintTable(std::ostream& out) const {
  out << "bucket  n  avg_I  avg_N  edit/s  +shortcuts/s  fullseq/s  "
         "speedup  evals(edit/short/full)\n";
  for (const BenchRow& r : rows) {
    out << r.label << "  " << r.sentences << "  "
        << Format("%.1f", r.avg_source_length) << "  "
        << Format("%.1f", r.avg_edit_count) << "  "
        << Format("%.1f", r.edit_rate) << "  "
        << Format("%.1f", r.shortcut_rate) << "  "
        << Format("%.1f", r.fullseq_rate) << "  "
        << Format("%.2fx", r.speedup) << " ("
        << Format("%.2fx", r.shortcut_speedup) << ")  "
        << Format("%.1f", r.edit_evaluations) << "/"
        << Format("%.1f", r.shortcut_evaluations) << "/"
        << Format("%.1f", r.fullseq_evaluations) << "\n";
  }
  for (const auto& w : warnings) out << "warning: " << w << "\n";
}

}  // namespace spanedit
