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

#include "spanedit/edit_io.h"

#include <fstream>
#include <istream>

#include "json.hpp"

namespace spanedit {

using nlohmann::json;

std::string FormatEditRecord(const EditRecord& record) {
  json edits = json::array();
  for (const auto& e : record.edits) {
    json repl = e.replacement ? json(*e.replacement) : json(nullptr);
    edits.push_back(json::array({e.tag, e.span_end, repl}));
  }
  json obj;
  obj["src"] = record.src;
  obj["edits"] = std::move(edits);
  return obj.dump();
}

EditRecord ParseEditRecord(const std::string& line) {
  json obj;
  try {
    obj = json::parse(line);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("malformed JSON: ") + e.what());
  }
  if (!obj.is_object() || !obj.contains("src") || !obj.contains("edits") ||
      !obj["src"].is_array() || !obj["edits"].is_array()) {
    throw DataError("edit record needs array fields \"src\" and \"edits\"");
  }
  EditRecord record;
  for (const auto& s : obj["src"]) {
    if (!s.is_string()) throw DataError("\"src\" entries must be strings");
    record.src.push_back(s.get<std::string>());
  }
  for (const auto& e : obj["edits"]) {
    if (!e.is_array() || e.size() != 3 || !e[0].is_string() ||
        !e[1].is_number_integer() || !(e[2].is_string() || e[2].is_null())) {
      throw DataError(
          "each edit must be [tag, span_end, replacement-or-null], got " +
          e.dump());
    }
    SurfaceEdit se;
    se.tag = e[0].get<std::string>();
    se.span_end = e[1].get<int>();
    if (e[2].is_string()) se.replacement = e[2].get<std::string>();
    record.edits.push_back(std::move(se));
  }
  return record;
}

std::vector<EditRecord> ReadEditFile(std::istream& in) {
  std::vector<EditRecord> records;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      records.push_back(ParseEditRecord(line));
    } catch (const DataError& e) {
      throw DataError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return records;
}

std::vector<EditRecord> ReadEditFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return ReadEditFile(in);
}

EditRecord ToRecord(const std::vector<std::string>& src,
                    const EditSequence& edits, const TagSet& tagset,
                    const Vocabulary& vocab) {
  EditRecord record;
  record.src = src;
  for (const EditOp& op : edits.ops) {
    SurfaceEdit se;
    se.tag = tagset.Surface(op.tag);
    se.span_end = op.span_end;
    if (op.is_self()) {
      se.replacement = "SELF";
    } else if (op.is_eos()) {
      se.replacement = "EOS";
    } else if (op.replacement != kDelId) {
      se.replacement = vocab.Surface(op.replacement);
    }
    record.edits.push_back(std::move(se));
  }
  return record;
}

EditSequence FromRecord(const EditRecord& record, const TagSet& tagset,
                        const Vocabulary& vocab) {
  EditSequence edits;
  edits.source_len = static_cast<int>(record.src.size());
  for (const auto& se : record.edits) {
    EditOp op;
    op.tag = tagset.Lookup(se.tag);
    op.span_end = se.span_end;
    if (op.is_self()) {
      op.replacement = kSelfReplacement;
    } else if (op.is_eos()) {
      op.replacement = kEosId;
    } else if (!se.replacement) {
      op.replacement = kDelId;
    } else {
      op.replacement = vocab.Lookup(*se.replacement);
    }
    edits.ops.push_back(op);
  }
  return edits;
}

std::vector<TsvPair> ReadParallelTsv(std::istream& in) {
  std::vector<TsvPair> pairs;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> cols;
    std::size_t start = 0;
    while (true) {
      std::size_t tab = line.find('\t', start);
      cols.push_back(line.substr(start, tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (cols.size() < 2 || cols.size() > 3) {
      throw DataError("line " + std::to_string(line_no) +
                      ": expected 2 or 3 tab-separated columns, got " +
                      std::to_string(cols.size()));
    }
    if (Tokenize(cols[0], TokenizeMode::kWhitespace).empty()) {
      throw DataError("line " + std::to_string(line_no) + ": empty source");
    }
    TsvPair p{cols[0], cols[1], std::nullopt};
    if (cols.size() == 3) {
      p.tags = Tokenize(cols[2], TokenizeMode::kWhitespace);
    }
    pairs.push_back(std::move(p));
  }
  if (pairs.empty()) throw DataError("empty parallel corpus");
  return pairs;
}

std::vector<TsvPair> ReadParallelTsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return ReadParallelTsv(in);
}

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

}  // namespace spanedit
