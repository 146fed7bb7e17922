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

// Input embedding and the token-level single-stream backbone.

#pragma once

#include <vector>

#include "calec/model/config.hpp"
#include "calec/nn/layers.hpp"
#include "calec/text/vocabulary.hpp"

namespace calec {

// Raw image features: row 0 is the global feature, rows 1..N the regions.
struct RegionSet {
  Mat features;

  int region_count() const { return static_cast<int>(features.rows()) - 1; }
  int candidate_count() const { return static_cast<int>(features.rows()); }
  void validate(int feature_dim) const;  // throws ShapeError / NumericError
};

// Embedded [CLS, w_1..w_M, SEP] followed by [g, r_1..r_N].
struct JointSequence {
  Var text;   // (M+2) x d
  Var image;  // (N+1) x d
  int content_length = 0;
  int region_count = 0;

  Var concatenated() const;
  int length() const { return content_length + region_count + 3; }
  // Row of content token i / the first image row within concatenated().
  static int token_row(int i) { return i + 1; }
  int image_row() const { return content_length + 2; }
};

// Shared token/position tables and the region projection.
class InputEmbedder {
 public:
  InputEmbedder() = default;
  InputEmbedder(ParameterStore& store, Initializer& init, const ModelConfig& config);

  // Token embedding + learned position embedding per row.
  Var embed_text(const TokenSequence& seq) const;
  // Linear projection of every raw feature row to the model dimension.
  Var project_regions(const RegionSet& regions) const;
  JointSequence joint(const TokenSequence& seq, const RegionSet& regions) const;

  const Var& token_table() const { return tokens_; }
  const Var& position_table() const { return positions_; }

 private:
  Var tokens_;
  Var positions_;
  nn::Linear region_projection_;
  int vocab_size_ = 0;
  int feature_dim_ = 0;
};

// L_T full-attention transformer layers over the concatenated sequence.
class Backbone {
 public:
  Backbone() = default;
  Backbone(ParameterStore& store, Initializer& init, const ModelConfig& config);

  Var encode(const Var& joint) const;
  Var encode(const JointSequence& joint) const { return encode(joint.concatenated()); }
  size_t layer_count() const { return layers_.size(); }

 private:
  std::vector<nn::TransformerLayer> layers_;
  nn::LayerNorm ln_final_;
  bool final_norm_ = false;
};

}  // namespace calec
