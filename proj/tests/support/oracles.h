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

// Random parallel pairs and independent reference computations.

#ifndef SPANEDIT_TESTS_SUPPORT_ORACLES_H_
#define SPANEDIT_TESTS_SUPPORT_ORACLES_H_

#include <random>
#include <span>
#include <utility>
#include <vector>

#include "spanedit/core.h"

namespace spanedit::testing {

// A random source over `vocab` ordinary ids (lengths 1..max_len) and a
// target made from it by random substitutions, insertions and deletions.
std::pair<std::vector<TokenId>, std::vector<TokenId>> RandomPair(
    std::mt19937_64& rng, int vocab = 50, int max_len = 30);

// Unit-cost Levenshtein distance by the textbook full-table recurrence.
int EditDistance(std::span<const TokenId> a, std::span<const TokenId> b);

}  // namespace spanedit::testing

#endif  // SPANEDIT_TESTS_SUPPORT_ORACLES_H_
