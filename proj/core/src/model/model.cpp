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

#include "calec/model/model.hpp"

#include "calec/errors.hpp"

namespace calec {

void ModelConfig::validate() const {
  auto need = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(what);
  };
  need(vocab_size > Vocabulary::kNumSpecial, "model.vocab_size must exceed the marker count");
  need(dim >= 1, "model.dim must be positive");
  need(feature_dim >= 1, "model.feature_dim must be positive");
  need(heads >= 1 && dim % heads == 0, "model.heads must divide model.dim");
  need(ffn_mult >= 1, "model.ffn_mult must be positive");
  need(dropout == 0.0, "model.dropout: only 0 is supported");
  need(backbone_layers >= 0 && within_chunk_layers >= 0 && cross_chunk_layers >= 0 &&
           cross_modal_layers >= 0,
       "layer counts must be non-negative");
  need(inferrer_layers >= 1, "model.inferrer_layers must be >= 1");
  need(num_relations >= 1, "model.num_relations must be >= 1");
  need(decoder_layers >= 1, "model.decoder_layers must be >= 1");
  need(max_text_positions >= 3 && max_decoder_positions >= 2, "position tables too small");
}

namespace {
const ModelConfig& validated(const ModelConfig& c) {
  c.validate();
  return c;
}
}  // namespace

CalecModel::CalecModel(const ModelConfig& config) : config_(validated(config)) {
  Initializer init(config_.seed);
  embedder_ = InputEmbedder(store_, init, config_);
  backbone_ = Backbone(store_, init, config_);
  csi_ = ChunkInteractor(store_, init, config_);
  inferrer_ = RelationInferrer(store_, init, config_);
  generator_ = Generator(store_, init, config_);
}

EncodedInput CalecModel::encode(const TokenSequence& seq, const ChunkSpans& spans,
                                const RegionSet& regions) const {
  EncodedInput e;
  e.joint = embedder_.joint(seq, regions);
  Var joint = e.joint.concatenated();
  e.backbone = backbone_.encode(joint);
  e.csi = csi_.forward(joint, spans, e.joint.content_length, e.joint.region_count + 1);
  e.fused = inferrer_.forward(e.backbone, e.csi.output, e.joint.content_length);
  return e;
}

CsiOutputs CalecModel::encode_csi(const TokenSequence& seq, const ChunkSpans& spans,
                                  const RegionSet& regions) const {
  return csi_.forward(embedder_.joint(seq, regions), spans);
}

void CalecModel::copy_parameters_from(const CalecModel& other) {
  for (const auto& [name, v] : other.params().all()) {
    Var mine = store_.get(name);
    if (mine.rows() != v.rows() || mine.cols() != v.cols()) {
      throw ShapeError("copy_parameters_from: shape mismatch for '" + name + "'");
    }
    mine.mutable_value() = v.value();
  }
}

}  // namespace calec
