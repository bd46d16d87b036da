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

// File formats: tab-separated parallel corpora and JSON-lines edit files.
//
// Edit file line:
//   {"src": ["a", "b"], "edits": [["SELF", 1, "SELF"], ["NON_SELF", 2, null],
//                                ["EOS", 2, "EOS"]]}
// The replacement of a SELF op is written "SELF", of the EOS op "EOS", and
// a deletion is null. Any other string is a token surface.

#ifndef SPANEDIT_EDIT_IO_H_
#define SPANEDIT_EDIT_IO_H_

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "spanedit/core.h"
#include "spanedit/editops.h"

namespace spanedit {

// One edit op spelled with surfaces. std::nullopt replacement is DEL.
struct SurfaceEdit {
  std::string tag;
  int span_end = 0;
  std::optional<std::string> replacement;

  bool operator==(const SurfaceEdit&) const = default;
};

struct EditRecord {
  std::vector<std::string> src;
  std::vector<SurfaceEdit> edits;

  bool operator==(const EditRecord&) const = default;
};

std::string FormatEditRecord(const EditRecord& record);
// Throws DataError on malformed JSON or missing fields.
EditRecord ParseEditRecord(const std::string& line);

// Reads every non-empty line; errors name the 1-based line number.
std::vector<EditRecord> ReadEditFile(std::istream& in);
std::vector<EditRecord> ReadEditFile(const std::filesystem::path& path);

EditRecord ToRecord(const std::vector<std::string>& src,
                    const EditSequence& edits, const TagSet& tagset,
                    const Vocabulary& vocab);

// Maps surfaces to ids. Unknown tags raise DataError; out-of-vocabulary
// replacement surfaces become UNK.
EditSequence FromRecord(const EditRecord& record, const TagSet& tagset,
                        const Vocabulary& vocab);

// One line of a parallel corpus. `tags` holds the optional third column:
// space-separated tags, one per changed region.
struct TsvPair {
  std::string source;
  std::string target;
  std::optional<std::vector<std::string>> tags;
};

// Throws DataError naming the line for malformed rows, and for an empty
// corpus.
std::vector<TsvPair> ReadParallelTsv(std::istream& in);
std::vector<TsvPair> ReadParallelTsv(const std::filesystem::path& path);

// Reads a plain text file, one sentence per line.
std::vector<std::string> ReadLines(const std::filesystem::path& path);

}  // namespace spanedit

#endif  // SPANEDIT_EDIT_IO_H_
