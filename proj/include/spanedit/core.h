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

// Domain types shared by every part of the toolkit: token and tag
// vocabularies, source/target sequences and span-based edit operations.

#ifndef SPANEDIT_CORE_H_
#define SPANEDIT_CORE_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace spanedit {

using TokenId = std::int32_t;
using TagId = std::int32_t;

// Reserved token ids. Ordinary tokens start at kFirstOrdinaryId.
inline constexpr TokenId kPadId = 0;
inline constexpr TokenId kDelId = 1;
inline constexpr TokenId kEosId = 2;
inline constexpr TokenId kUnkId = 3;
inline constexpr TokenId kFirstOrdinaryId = 4;

// Replacement marker of a SELF edit. It is not a vocabulary entry.
inline constexpr TokenId kSelfReplacement = -1;

// Reserved tag ids present in every TagSet.
inline constexpr TagId kSelfTag = 0;
inline constexpr TagId kEosTag = 1;

inline constexpr std::string_view kPadSurface = "<pad>";
inline constexpr std::string_view kDelSurface = "<del>";
inline constexpr std::string_view kEosSurface = "<eos>";
inline constexpr std::string_view kUnkSurface = "<unk>";
inline constexpr std::string_view kSelfSurface = "<self>";

// Malformed or inconsistent input data (files, edit sequences, corpora).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite values during training or inference.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Token vocabulary. The four reserved surfaces always occupy ids 0..3;
// the remaining entries follow in construction order. Immutable.
class Vocabulary {
 public:
  Vocabulary();
  // Duplicates and reserved surfaces in `surfaces` are skipped.
  explicit Vocabulary(std::span<const std::string> surfaces);

  // Returns kUnkId for out-of-vocabulary surfaces.
  TokenId Lookup(std::string_view surface) const;
  bool Contains(std::string_view surface) const;
  // Handles kSelfReplacement as well as ordinary ids.
  const std::string& Surface(TokenId id) const;
  std::size_t size() const { return entries_.size(); }
  const std::vector<std::string>& entries() const { return entries_; }

  std::vector<TokenId> Encode(std::span<const std::string> surfaces) const;
  std::vector<std::string> Decode(std::span<const TokenId> ids) const;

  // One ordinary surface per line; line k holds id k + kFirstOrdinaryId.
  void Save(const std::filesystem::path& path) const;
  static Vocabulary Load(const std::filesystem::path& path);

  bool operator==(const Vocabulary& other) const {
    return entries_ == other.entries_;
  }

 private:
  std::vector<std::string> entries_;
  std::unordered_map<std::string, TokenId> lookup_;
};

// Tag vocabulary T. SELF and EOS are always ids 0 and 1.
class TagSet {
 public:
  TagSet() : TagSet("trivial", {}) {}
  // `task_tags` excludes SELF and EOS. Duplicates are rejected.
  TagSet(std::string name, std::span<const std::string> task_tags);

  const std::string& name() const { return name_; }
  std::size_t size() const { return tags_.size(); }
  const std::vector<std::string>& tags() const { return tags_; }
  const std::string& Surface(TagId id) const;
  // Throws DataError for unknown surfaces.
  TagId Lookup(std::string_view surface) const;
  bool Contains(std::string_view surface) const;

  // One task tag per line, SELF/EOS implicit.
  void Save(const std::filesystem::path& path) const;
  static TagSet Load(const std::filesystem::path& path, std::string name);

  bool operator==(const TagSet& other) const {
    return name_ == other.name_ && tags_ == other.tags_;
  }

 private:
  std::string name_;
  std::vector<std::string> tags_;
  std::unordered_map<std::string, TagId> lookup_;
};

// Names accepted by BuiltinTagSet().
const std::vector<std::string>& BuiltinTagSetNames();

// Built-in tag vocabularies: textnorm-en, textnorm-ru, fusion, trivial,
// errant. Throws std::invalid_argument naming the valid set otherwise.
TagSet BuiltinTagSet(std::string_view task);

// Non-empty source sequence x of length I.
class SourceSequence {
 public:
  // Throws DataError when `tokens` is empty.
  explicit SourceSequence(std::vector<TokenId> tokens);

  int length() const { return static_cast<int>(tokens_.size()); }
  const std::vector<TokenId>& tokens() const { return tokens_; }
  TokenId operator[](int i) const { return tokens_[i]; }

  bool operator==(const SourceSequence&) const = default;

 private:
  std::vector<TokenId> tokens_;
};

// Target sequence y; may be empty.
struct TargetSequence {
  std::vector<TokenId> tokens;

  int length() const { return static_cast<int>(tokens.size()); }
  bool operator==(const TargetSequence&) const = default;
};

// One (tag, span end, replacement) triple. The span covers source
// positions (previous span end, span_end].
struct EditOp {
  TagId tag = kSelfTag;
  int span_end = 0;
  TokenId replacement = kSelfReplacement;

  bool is_self() const { return tag == kSelfTag; }
  bool is_eos() const { return tag == kEosTag; }
  bool operator==(const EditOp&) const = default;
};

inline EditOp SelfOp(int span_end) {
  return {kSelfTag, span_end, kSelfReplacement};
}
inline EditOp EosOp(int source_len) { return {kEosTag, source_len, kEosId}; }

struct EditSequence {
  std::vector<EditOp> ops;
  int source_len = 0;

  bool operator==(const EditSequence&) const = default;
};

enum class TokenizeMode { kWhitespace, kCharacter };

TokenizeMode ParseTokenizeMode(std::string_view name);

// Whitespace mode splits on runs of whitespace; character mode yields one
// surface per UTF-8 code point, spaces included.
std::vector<std::string> Tokenize(std::string_view text, TokenizeMode mode);

// Inverse of Tokenize for normalised text: space-joined in whitespace mode,
// concatenated in character mode.
std::string Detokenize(std::span<const std::string> tokens, TokenizeMode mode);

}  // namespace spanedit

#endif  // SPANEDIT_CORE_H_
