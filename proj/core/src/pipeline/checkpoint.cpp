// Copyright 2026 The CALeC Authors.
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

#include "calec/pipeline/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "calec/errors.hpp"

namespace calec {

using nlohmann::json;

static_assert(std::endian::native == std::endian::little, "checkpoint IO assumes little endian");

namespace {

constexpr char kMagic[8] = {'C', 'A', 'L', 'E', 'C', 'K', 'P', 'T'};

json config_to_json(const ModelConfig& c) {
  return json{{"vocab_size", c.vocab_size},
              {"dim", c.dim},
              {"feature_dim", c.feature_dim},
              {"max_text_positions", c.max_text_positions},
              {"max_decoder_positions", c.max_decoder_positions},
              {"heads", c.heads},
              {"ffn_mult", c.ffn_mult},
              {"final_norm", c.final_norm},
              {"bias", c.bias},
              {"dropout", c.dropout},
              {"backbone_layers", c.backbone_layers},
              {"within_chunk_layers", c.within_chunk_layers},
              {"cross_chunk_layers", c.cross_chunk_layers},
              {"cross_modal_layers", c.cross_modal_layers},
              {"inferrer_layers", c.inferrer_layers},
              {"inferrer_shared", c.inferrer_shared},
              {"num_relations", c.num_relations},
              {"decoder_layers", c.decoder_layers},
              {"lexical_mixture", c.lexical_mixture},
              {"seed", c.seed}};
}

ModelConfig config_from_json(const json& j) {
  ModelConfig c;
  c.vocab_size = j.at("vocab_size");
  c.dim = j.at("dim");
  c.feature_dim = j.at("feature_dim");
  c.max_text_positions = j.at("max_text_positions");
  c.max_decoder_positions = j.at("max_decoder_positions");
  c.heads = j.at("heads");
  c.ffn_mult = j.at("ffn_mult");
  c.final_norm = j.at("final_norm");
  c.bias = j.at("bias");
  c.dropout = j.at("dropout");
  c.backbone_layers = j.at("backbone_layers");
  c.within_chunk_layers = j.at("within_chunk_layers");
  c.cross_chunk_layers = j.at("cross_chunk_layers");
  c.cross_modal_layers = j.at("cross_modal_layers");
  c.inferrer_layers = j.at("inferrer_layers");
  c.inferrer_shared = j.at("inferrer_shared");
  c.num_relations = j.at("num_relations");
  c.decoder_layers = j.at("decoder_layers");
  c.lexical_mixture = j.at("lexical_mixture");
  c.seed = j.at("seed");
  return c;
}

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::istream& in, const std::string& path) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) {
    throw CheckpointError(path + ": truncated header");
  }
  return v;
}

}  // namespace

std::string stage_name(Stage stage) {
  switch (stage) {
    case Stage::kInit: return "init";
    case Stage::kPretrain: return "pretrain";
    case Stage::kStage1: return "stage1";
    case Stage::kStage2: return "stage2";
  }
  return "init";
}

Stage parse_stage(const std::string& name) {
  for (Stage s : {Stage::kInit, Stage::kPretrain, Stage::kStage1, Stage::kStage2}) {
    if (stage_name(s) == name) return s;
  }
  throw CheckpointError("unknown stage tag '" + name + "'");
}

Checkpoint Checkpoint::capture(const CalecModel& model, const std::vector<std::string>& vocabulary,
                               Stage stage) {
  Checkpoint c;
  c.config = model.config();
  c.vocabulary = vocabulary;
  c.stage = stage;
  for (const auto& [name, v] : model.params().all()) c.arrays.emplace(name, v.value());
  return c;
}

void Checkpoint::restore(CalecModel& model) const {
  for (const auto& [name, v] : model.params().all()) {
    auto it = arrays.find(name);
    if (it == arrays.end()) throw CheckpointError("checkpoint lacks parameter '" + name + "'");
    if (it->second.rows() != v.rows() || it->second.cols() != v.cols()) {
      throw CheckpointError("shape mismatch for '" + name + "': checkpoint " +
                            std::to_string(it->second.rows()) + "x" +
                            std::to_string(it->second.cols()) + ", model " + shape_string(v.value()));
    }
    Var p = v;
    p.mutable_value() = it->second;
  }
}

void save_checkpoint(const std::string& path, const Checkpoint& c) {
  json manifest;
  manifest["config"] = config_to_json(c.config);
  manifest["vocabulary"] = c.vocabulary;
  manifest["stage"] = stage_name(c.stage);
  manifest["optimizer_step"] = c.optimizer_step;
  json entries = json::array();
  std::uint64_t offset = 0;
  for (const auto& [name, m] : c.arrays) {
    entries.push_back({{"name", name}, {"shape", {m.rows(), m.cols()}}, {"offset", offset}});
    offset += static_cast<std::uint64_t>(m.size());
  }
  manifest["entries"] = std::move(entries);
  const std::string text = manifest.dump();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("cannot write checkpoint '" + path + "'");
  out.write(kMagic, sizeof kMagic);
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint64_t>(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& [name, m] : c.arrays) {
    // Row-major storage, so the payload order is row by row.
    out.write(reinterpret_cast<const char*>(m.data()),
              static_cast<std::streamsize>(m.size() * sizeof(double)));
  }
  if (!out) throw CheckpointError("write failed for '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint '" + path + "'");
  char magic[8];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0) {
    throw CheckpointError(path + ": not a checkpoint file");
  }
  const auto version = get<std::uint32_t>(in, path);
  if (version != kCheckpointVersion) {
    throw CheckpointError(path + ": unsupported format version " + std::to_string(version));
  }
  const auto length = get<std::uint64_t>(in, path);
  if (length > (1ULL << 32)) throw CheckpointError(path + ": implausible manifest length");
  std::string text(length, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(length))) {
    throw CheckpointError(path + ": truncated manifest");
  }
  const auto payload_start = in.tellg();
  in.seekg(0, std::ios::end);
  const auto payload_bytes = static_cast<std::uint64_t>(in.tellg() - payload_start);

  Checkpoint c;
  try {
    const json manifest = json::parse(text);
    c.config = config_from_json(manifest.at("config"));
    c.vocabulary = manifest.at("vocabulary").get<std::vector<std::string>>();
    c.stage = parse_stage(manifest.at("stage").get<std::string>());
    c.optimizer_step = manifest.value("optimizer_step", 0L);
    for (const auto& e : manifest.at("entries")) {
      const auto name = e.at("name").get<std::string>();
      const auto rows = e.at("shape").at(0).get<Eigen::Index>();
      const auto cols = e.at("shape").at(1).get<Eigen::Index>();
      const auto offset = e.at("offset").get<std::uint64_t>();
      if (rows < 0 || cols < 0) throw CheckpointError(path + ": negative shape for " + name);
      const auto count = static_cast<std::uint64_t>(rows * cols);
      if ((offset + count) * sizeof(double) > payload_bytes) {
        throw CheckpointError(path + ": entry '" + name + "' runs past the payload");
      }
      Mat m(rows, cols);
      in.seekg(payload_start + static_cast<std::streamoff>(offset * sizeof(double)));
      in.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(count * sizeof(double)));
      if (!in) throw CheckpointError(path + ": read failed for '" + name + "'");
      c.arrays.emplace(name, std::move(m));
    }
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(path + ": bad manifest: " + e.what());
  }
  return c;
}

}  // namespace calec
