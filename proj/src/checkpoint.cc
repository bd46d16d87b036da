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

#include "spanedit/checkpoint.h"

#include <bit>
#include <cstring>
#include <fstream>

#include "json.hpp"

namespace spanedit {

using nlohmann::json;

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'S', 'P', 'A', 'N', 'E', 'D', 'I', 'T'};

json ConfigJson(const ModelConfig& c) {
  return {{"hidden_units", c.hidden_units},
          {"encoder_layers", c.encoder_layers},
          {"decoder_a_layers", c.decoder_a_layers},
          {"decoder_b_layers", c.decoder_b_layers},
          {"attention_heads", c.attention_heads},
          {"filter_units", c.filter_units},
          {"tag_embed_dim", c.tag_embed_dim},
          {"max_positions", c.max_positions},
          {"vocab_size", c.vocab_size},
          {"tagset_size", c.tagset_size},
          {"mode", ModeName(c.mode)},
          {"decoder_b_encoder_attention", c.decoder_b_encoder_attention},
          {"zero_init_heads", c.zero_init_heads}};
}

ModelConfig ConfigFromJson(const json& j) {
  if (!j.is_object()) throw DataError("model config must be a JSON object");
  ModelConfig c;
  try {
    c.hidden_units = j.value("hidden_units", c.hidden_units);
    c.encoder_layers = j.value("encoder_layers", c.encoder_layers);
    c.decoder_a_layers = j.value("decoder_a_layers", c.decoder_a_layers);
    c.decoder_b_layers = j.value("decoder_b_layers", c.decoder_b_layers);
    c.attention_heads = j.value("attention_heads", c.attention_heads);
    c.filter_units = j.value("filter_units", c.filter_units);
    c.tag_embed_dim = j.value("tag_embed_dim", c.tag_embed_dim);
    c.max_positions = j.value("max_positions", c.max_positions);
    c.vocab_size = j.value("vocab_size", c.vocab_size);
    c.tagset_size = j.value("tagset_size", c.tagset_size);
    if (j.contains("mode")) {
      c.mode = ParseModelMode(j.at("mode").get<std::string>());
    }
    c.decoder_b_encoder_attention =
        j.value("decoder_b_encoder_attention", c.decoder_b_encoder_attention);
    c.zero_init_heads = j.value("zero_init_heads", c.zero_init_heads);
  } catch (const json::exception& e) {
    throw DataError(std::string("bad model config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("bad model config: ") + e.what());
  }
  return c;
}

template <typename T>
void WritePod(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(value));
}

template <typename T>
T ReadPod(std::istream& in) {
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(value))) {
    throw DataError("checkpoint truncated");
  }
  return value;
}

}  // namespace

std::string ModelConfigToJson(const ModelConfig& config) {
  return ConfigJson(config).dump(2);
}

ModelConfig ModelConfigFromJson(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("malformed model config JSON: ") + e.what());
  }
  return ConfigFromJson(j);
}

void SaveCheckpoint(const std::filesystem::path& path, const EditModel& model,
                    const Vocabulary& vocab, const TagSet& tagset,
                    TokenizeMode tokenize, std::uint64_t seed) {
  json header;
  header["config"] = ConfigJson(model.config());
  header["seed"] = seed;
  header["tokenize"] =
      tokenize == TokenizeMode::kCharacter ? "character" : "whitespace";
  header["vocabulary"] = std::vector<std::string>(
      vocab.entries().begin() + kFirstOrdinaryId, vocab.entries().end());
  header["tagset"] = {
      {"name", tagset.name()},
      {"tags", std::vector<std::string>(tagset.tags().begin() + 2,
                                        tagset.tags().end())}};
  json params = json::array();
  for (const auto& p : model.parameters()) {
    params.push_back(
        {{"name", p.name}, {"rows", p.tensor.rows()}, {"cols", p.tensor.cols()}});
  }
  header["parameters"] = std::move(params);
  const std::string text = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(kMagic, sizeof(kMagic));
  WritePod<std::uint32_t>(out, kCheckpointVersion);
  WritePod<std::uint64_t>(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& p : model.parameters()) {
    const auto& v = p.tensor.value();
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(double)));
  }
  if (!out) throw DataError("failed writing " + path.string());
}

Checkpoint LoadCheckpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  char magic[sizeof(kMagic)];
  if (!in.read(magic, sizeof(magic)) ||
      std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw DataError(path.string() + " is not a spanedit checkpoint");
  }
  const auto version = ReadPod<std::uint32_t>(in);
  if (version != kCheckpointVersion) {
    throw DataError("unsupported checkpoint version " + std::to_string(version));
  }
  const auto length = ReadPod<std::uint64_t>(in);
  std::string text(length, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(length))) {
    throw DataError("checkpoint truncated");
  }
  json header;
  try {
    header = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("bad checkpoint header: ") + e.what());
  }

  try {
    ModelConfig config = ConfigFromJson(header.at("config"));
    const auto seed = header.at("seed").get<std::uint64_t>();
    const auto surfaces = header.at("vocabulary").get<std::vector<std::string>>();
    const auto& ts = header.at("tagset");
    TagSet tagset(ts.at("name").get<std::string>(),
                  ts.at("tags").get<std::vector<std::string>>());
    Checkpoint ckpt{EditModel(config, seed), Vocabulary(surfaces),
                    std::move(tagset),
                    ParseTokenizeMode(header.at("tokenize").get<std::string>()),
                    seed};
    const auto& listed = header.at("parameters");
    if (listed.size() != ckpt.model.parameters().size()) {
      throw DataError("checkpoint lists " + std::to_string(listed.size()) +
                      " parameters, model has " +
                      std::to_string(ckpt.model.parameters().size()));
    }
    for (const auto& entry : listed) {
      const auto name = entry.at("name").get<std::string>();
      autodiff::Tensor* tensor;
      try {
        tensor = &ckpt.model.parameter(name);
      } catch (const std::out_of_range&) {
        throw DataError("unknown parameter " + name + " in checkpoint");
      }
      if (entry.at("rows").get<Eigen::Index>() != tensor->rows() ||
          entry.at("cols").get<Eigen::Index>() != tensor->cols()) {
        throw DataError("shape mismatch for parameter " + name);
      }
      auto& value = tensor->mutable_value();
      if (!in.read(reinterpret_cast<char*>(value.data()),
                   static_cast<std::streamsize>(value.size() * sizeof(double)))) {
        throw DataError("checkpoint truncated in parameter " + name);
      }
    }
    return ckpt;
  } catch (const json::exception& e) {
    throw DataError(std::string("bad checkpoint header: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("bad checkpoint: ") + e.what());
  }
}

}  // namespace spanedit
