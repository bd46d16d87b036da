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

// Synthetic editing tasks for training-based tests.

#ifndef SPANEDIT_TESTS_SUPPORT_TOY_TASKS_H_
#define SPANEDIT_TESTS_SUPPORT_TOY_TASKS_H_

#include <cstdint>
#include <string>
#include <vector>

#include "spanedit/core.h"
#include "spanedit/decoder.h"
#include "spanedit/model.h"
#include "spanedit/trainer.h"

namespace spanedit::testing {

struct ToyPair {
  std::vector<std::string> source;
  std::vector<std::string> target;
  std::vector<std::string> region_tags;  // empty: untagged
};

// Article agreement, doubled filler words and a missing final period.
std::vector<ToyPair> RuleEditCorpus(int size, std::uint64_t seed);

// Misspellings and article agreement (deterministic), plus coin-flip
// deletion of "the" and optional commas (noise). Tagged with ERRANT labels.
std::vector<ToyPair> NoisyTaggedCorpus(int size, std::uint64_t seed);

// Sources with up to two misspellings; targets fix only the leftmost one.
std::vector<ToyPair> LeftmostFixCorpus(int size, std::uint64_t seed);
// A sentence with exactly `errors` misspellings and its full correction.
ToyPair MultiErrorPair(int errors, std::uint64_t seed);

// Long sources (24 to 28 tokens) with a single edit each.
std::vector<ToyPair> HighCopyCorpus(int size, std::uint64_t seed);

// Vocabulary over every toy word and misspelling.
Vocabulary ToyVocabulary();

std::vector<TokenId> Ids(const Vocabulary& vocab,
                         const std::vector<std::string>& words);

// Extracted, anchored training examples. Region tags are used when present.
std::vector<TrainExample> MakeExamples(const std::vector<ToyPair>& pairs,
                                       const Vocabulary& vocab,
                                       const TagSet& tagset);

// Desk-scale config for the toy vocabulary.
ModelConfig ToyConfig(const Vocabulary& vocab, const TagSet& tagset,
                      ModelMode mode);

// Fraction of examples whose greedy (or beam-1 full-sequence) output equals
// the target.
double GreedyExactMatch(const EditModel& model,
                        const std::vector<TrainExample>& examples,
                        const DecodeParams& params);

// Trains in chunks of `chunk` steps until greedy exact match reaches
// `target_rate` or `max_steps` is spent. Returns the steps taken.
int TrainUntil(EditModel& model, const std::vector<TrainExample>& examples,
               int max_steps, int chunk, double target_rate,
               std::uint64_t seed, double* final_rate = nullptr);

}  // namespace spanedit::testing

#endif  // SPANEDIT_TESTS_SUPPORT_TOY_TASKS_H_
