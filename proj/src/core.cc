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

#include "spanedit/core.h"

#include <array>
#include <fstream>

namespace spanedit {
namespace {

const std::array<std::string, 4> kReservedSurfaces = {
    std::string(kPadSurface), std::string(kDelSurface),
    std::string(kEosSurface), std::string(kUnkSurface)};

const std::string kSelfSurfaceString(kSelfSurface);

std::vector<std::string> ReadLines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

void WriteLines(const std::filesystem::path& path,
                std::span<const std::string> lines) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& line : lines) out << line << '\n';
}

bool IsSpace(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

// Byte length of the UTF-8 sequence starting with `lead`; malformed lead
// bytes are treated as single bytes.
int Utf8Length(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead >> 5) == 0x6) return 2;
  if ((lead >> 4) == 0xE) return 3;
  if ((lead >> 3) == 0x1E) return 4;
  return 1;
}

}  // namespace

Vocabulary::Vocabulary() : Vocabulary(std::span<const std::string>()) {}

Vocabulary::Vocabulary(std::span<const std::string> surfaces) {
  entries_.assign(kReservedSurfaces.begin(), kReservedSurfaces.end());
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    lookup_.emplace(entries_[i], static_cast<TokenId>(i));
  }
  for (const auto& s : surfaces) {
    if (s.empty() || s == kSelfSurface) continue;
    if (lookup_.contains(s)) continue;
    lookup_.emplace(s, static_cast<TokenId>(entries_.size()));
    entries_.push_back(s);
  }
}

TokenId Vocabulary::Lookup(std::string_view surface) const {
  auto it = lookup_.find(std::string(surface));
  return it == lookup_.end() ? kUnkId : it->second;
}

bool Vocabulary::Contains(std::string_view surface) const {
  return lookup_.contains(std::string(surface));
}

const std::string& Vocabulary::Surface(TokenId id) const {
  if (id == kSelfReplacement) return kSelfSurfaceString;
  if (id < 0 || static_cast<std::size_t>(id) >= entries_.size()) {
    throw std::out_of_range("token id " + std::to_string(id) +
                            " outside vocabulary of size " +
                            std::to_string(entries_.size()));
  }
  return entries_[id];
}

std::vector<TokenId> Vocabulary::Encode(
    std::span<const std::string> surfaces) const {
  std::vector<TokenId> ids;
  ids.reserve(surfaces.size());
  for (const auto& s : surfaces) ids.push_back(Lookup(s));
  return ids;
}

std::vector<std::string> Vocabulary::Decode(
    std::span<const TokenId> ids) const {
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (TokenId id : ids) out.push_back(Surface(id));
  return out;
}

void Vocabulary::Save(const std::filesystem::path& path) const {
  WriteLines(path, std::span(entries_).subspan(kFirstOrdinaryId));
}

Vocabulary Vocabulary::Load(const std::filesystem::path& path) {
  auto lines = ReadLines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) {
      throw DataError(path.string() + ":" + std::to_string(i + 1) +
                      ": empty vocabulary entry");
    }
  }
  return Vocabulary(lines);
}

TagSet::TagSet(std::string name, std::span<const std::string> task_tags)
    : name_(std::move(name)) {
  tags_ = {"SELF", "EOS"};
  tags_.insert(tags_.end(), task_tags.begin(), task_tags.end());
  for (std::size_t i = 0; i < tags_.size(); ++i) {
    if (tags_[i].empty()) throw DataError("empty tag surface");
    if (!lookup_.emplace(tags_[i], static_cast<TagId>(i)).second) {
      throw DataError("duplicate tag '" + tags_[i] + "' in tag set " + name_);
    }
  }
}

const std::string& TagSet::Surface(TagId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tags_.size()) {
    throw std::out_of_range("tag id " + std::to_string(id) +
                            " outside tag set " + name_);
  }
  return tags_[id];
}

TagId TagSet::Lookup(std::string_view surface) const {
  auto it = lookup_.find(std::string(surface));
  if (it == lookup_.end()) {
    throw DataError("unknown tag '" + std::string(surface) + "' for tag set " +
                    name_);
  }
  return it->second;
}

bool TagSet::Contains(std::string_view surface) const {
  return lookup_.contains(std::string(surface));
}

void TagSet::Save(const std::filesystem::path& path) const {
  WriteLines(path, std::span(tags_).subspan(2));
}

TagSet TagSet::Load(const std::filesystem::path& path, std::string name) {
  auto lines = ReadLines(path);
  std::erase(lines, std::string());
  return TagSet(std::move(name), lines);
}

const std::vector<std::string>& BuiltinTagSetNames() {
  static const std::vector<std::string> names = {
      "textnorm-en", "textnorm-ru", "fusion", "trivial", "errant"};
  return names;
}

TagSet BuiltinTagSet(std::string_view task) {
  // Semiotic classes.
  static const std::vector<std::string> kTextNorm = {
      "PLAIN",   "PUNCT",      "TRANS", "LETTERS", "CARDINAL",
      "VERBATIM", "ORDINAL",   "DECIMAL", "ELECTRONIC", "DIGIT",
      "MONEY",   "FRACTION",   "TIME",  "ADDRESS"};
  // Discourse types.
  static const std::vector<std::string> kFusion = {
      "PAIR_ANAPHORA",
      "PAIR_CONN",
      "PAIR_CONN_ANAPHORA",
      "PAIR_NONE",
      "SINGLE_APPOSITION",
      "SINGLE_CATAPHORA",
      "SINGLE_CONN_INNER",
      "SINGLE_CONN_INNER_ANAPHORA",
      "SINGLE_CONN_START",
      "SINGLE_RELATIVE",
      "SINGLE_S_COORD",
      "SINGLE_S_COORD_ANAPHORA",
      "SINGLE_VP_COORD"};
  // Grammatical error types.
  static const std::vector<std::string> kErrant = {
      "ADJ",       "ADJ:FORM",  "ADV",       "CONJ",       "CONTR",
      "DET",       "MORPH",     "NOUN",      "NOUN:INFL",  "NOUN:NUM",
      "NOUN:POSS", "ORTH",      "OTHER",     "PART",       "PREP",
      "PRON",      "PUNCT",     "SPELL",     "UNK",        "VERB",
      "VERB:FORM", "VERB:INFL", "VERB:SVA",  "VERB:TENSE", "WO"};
  static const std::vector<std::string> kTrivial = {"NON_SELF"};

  if (task == "textnorm-en" || task == "textnorm-ru") {
    return TagSet(std::string(task), kTextNorm);
  }
  if (task == "fusion") return TagSet("fusion", kFusion);
  if (task == "errant") return TagSet("errant", kErrant);
  if (task == "trivial") return TagSet("trivial", kTrivial);

  std::string valid;
  for (const auto& n : BuiltinTagSetNames()) {
    if (!valid.empty()) valid += ", ";
    valid += n;
  }
  throw std::invalid_argument("unknown tag set '" + std::string(task) +
                              "'; valid: " + valid);
}

SourceSequence::SourceSequence(std::vector<TokenId> tokens)
    : tokens_(std::move(tokens)) {
  if (tokens_.empty()) throw DataError("empty source sequence");
}

TokenizeMode ParseTokenizeMode(std::string_view name) {
  if (name == "whitespace") return TokenizeMode::kWhitespace;
  if (name == "character") return TokenizeMode::kCharacter;
  throw std::invalid_argument("unknown tokenization mode '" +
                              std::string(name) +
                              "'; valid: whitespace, character");
}

std::vector<std::string> Tokenize(std::string_view text, TokenizeMode mode) {
  std::vector<std::string> out;
  if (mode == TokenizeMode::kWhitespace) {
    std::size_t i = 0;
    while (i < text.size()) {
      while (i < text.size() && IsSpace(text[i])) ++i;
      std::size_t start = i;
      while (i < text.size() && !IsSpace(text[i])) ++i;
      if (i > start) out.emplace_back(text.substr(start, i - start));
    }
    return out;
  }
  std::size_t i = 0;
  while (i < text.size()) {
    std::size_t len = Utf8Length(static_cast<unsigned char>(text[i]));
    len = std::min(len, text.size() - i);
    out.emplace_back(text.substr(i, len));
    i += len;
  }
  return out;
}

std::string Detokenize(std::span<const std::string> tokens,
                       TokenizeMode mode) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0 && mode == TokenizeMode::kWhitespace) out += ' ';
    out += tokens[i];
  }
  return out;
}

}  // namespace spanedit
