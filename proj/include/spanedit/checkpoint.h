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

// Checkpoint container.
//
// Layout (all integers little-endian):
//
//   bytes 0..7    magic "SPANEDIT"
//   uint32        format version (currently 1)
//   uint64        header length H
//   H bytes       UTF-8 JSON header:
//                   {"config": {...ModelConfig fields...},
//                    "seed": n, "tokenize": "whitespace"|"character",
//                    "vocabulary": [ordinary surfaces...],
//                    "tagset": {"name": s, "tags": [task tags...]},
//                    "parameters": [{"name": s, "rows": r, "cols": c}, ...]}
//   payload       every parameter in header order, row-major float64
//
// Loading rebuilds the model from the config and then overwrites each
// parameter by name, so the file must list exactly the model's parameters.

#ifndef SPANEDIT_CHECKPOINT_H_
#define SPANEDIT_CHECKPOINT_H_

#include <cstdint>
#include <filesystem>
#include <string>

#include "spanedit/core.h"
#include "spanedit/model.h"

namespace spanedit {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  EditModel model;
  Vocabulary vocabulary;
  TagSet tagset;
  TokenizeMode tokenize = TokenizeMode::kWhitespace;
  std::uint64_t seed = 0;
};

std::string ModelConfigToJson(const ModelConfig& config);
// Missing fields keep their defaults. Throws DataError on bad JSON.
ModelConfig ModelConfigFromJson(const std::string& json_text);

void SaveCheckpoint(const std::filesystem::path& path, const EditModel& model,
                    const Vocabulary& vocab, const TagSet& tagset,
                    TokenizeMode tokenize, std::uint64_t seed);
// Throws DataError for missing, truncated or inconsistent files.
Checkpoint LoadCheckpoint(const std::filesystem::path& path);

}  // namespace spanedit

#endif  // SPANEDIT_CHECKPOINT_H_
