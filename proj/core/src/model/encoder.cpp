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

#include "calec/model/encoder.hpp"

#include <numeric>
#include <string>

#include "calec/errors.hpp"

namespace calec {

void RegionSet::validate(int feature_dim) const {
  if (features.rows() < 2) throw ShapeError("a region set needs the global feature and >= 1 region");
  if (features.cols() != feature_dim) {
    throw ShapeError("region features have length " + std::to_string(features.cols()) +
                     ", expected " + std::to_string(feature_dim));
  }
  if (!features.allFinite()) throw NumericError("non-finite region feature");
}

Var JointSequence::concatenated() const { return ops::concat_rows({text, image}); }

InputEmbedder::InputEmbedder(ParameterStore& store, Initializer& init, const ModelConfig& config)
    : tokens_(store.create("embed.token", init.xavier(config.vocab_size, config.dim))),
      positions_(store.create("embed.position",
                              init.xavier(config.max_text_positions, config.dim))),
      region_projection_(store, init, "embed.region", config.feature_dim, config.dim, config.bias),
      vocab_size_(config.vocab_size),
      feature_dim_(config.feature_dim) {}

Var InputEmbedder::embed_text(const TokenSequence& seq) const {
  for (int id : seq.ids) {
    if (id < 0 || id >= vocab_size_) {
      throw VocabError("token id " + std::to_string(id) + " outside vocabulary of " +
                       std::to_string(vocab_size_));
    }
  }
  const auto n = static_cast<Eigen::Index>(seq.ids.size());
  if (n > positions_.rows()) {
    throw ShapeError("sequence of " + std::to_string(n) + " tokens exceeds " +
                     std::to_string(positions_.rows()) + " positions");
  }
  std::vector<int> pos(seq.ids.size());
  std::iota(pos.begin(), pos.end(), 0);
  return ops::add(ops::gather_rows(tokens_, seq.ids), ops::gather_rows(positions_, pos));
}

Var InputEmbedder::project_regions(const RegionSet& regions) const {
  regions.validate(feature_dim_);
  return region_projection_(Var(regions.features));
}

JointSequence InputEmbedder::joint(const TokenSequence& seq, const RegionSet& regions) const {
  JointSequence j;
  j.text = embed_text(seq);
  j.image = project_regions(regions);
  j.content_length = seq.content_length();
  j.region_count = regions.region_count();
  return j;
}

Backbone::Backbone(ParameterStore& store, Initializer& init, const ModelConfig& config) {
  for (int l = 0; l < config.backbone_layers; ++l) {
    layers_.emplace_back(store, init, "backbone.layer" + std::to_string(l), config.dim,
                         config.heads, config.ffn_mult, config.bias);
  }
  if (config.final_norm) {
    ln_final_ = nn::LayerNorm(store, "backbone.ln_final", config.dim);
    final_norm_ = true;
  }
}

Var Backbone::encode(const Var& joint) const {
  Var h = joint;
  const Mask mask = nn::full_mask(h.rows(), h.rows());
  for (const auto& layer : layers_) h = layer(h, mask).hidden;
  return final_norm_ ? ln_final_(h) : h;
}

}  // namespace calec
