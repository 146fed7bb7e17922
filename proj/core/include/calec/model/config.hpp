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

#pragma once

#include <cstdint>

namespace calec {

struct ModelConfig {
  int vocab_size = 0;
  int dim = 32;
  int feature_dim = 16;  // raw region feature length
  int max_text_positions = 64;
  int max_decoder_positions = 96;
  int heads = 1;
  int ffn_mult = 4;
  bool final_norm = true;  // LayerNorm on the backbone output and on O^C
  bool bias = true;  // biases on FFN, fusion, classifier and gate projections
  double dropout = 0.0;  // only 0 is supported

  int backbone_layers = 4;
  int within_chunk_layers = 3;
  int cross_chunk_layers = 6;
  int cross_modal_layers = 3;

  int inferrer_layers = 3;
  bool inferrer_shared = false;  // one projection set reused by every refinement layer
  int num_relations = 3;

  int decoder_layers = 2;
  bool lexical_mixture = true;  // false: P = P_vocab (no constraint pointer)

  std::uint64_t seed = 1234;

  // Throws ConfigError on inconsistent values.
  void validate() const;
};

}  // namespace calec
