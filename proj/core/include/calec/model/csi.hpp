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

// Chunk-aware semantic interactor.
//
// Three stacks run over the joint [text; image] sequence:
//   within-chunk  tokens attend only inside their chunk, markers only to
//                 themselves, image rows to every image row;
//   cross-chunk   unrestricted attention over the whole sequence;
//   cross-modal   each chunk is mean-pooled, attends over [g, r_1..r_N], and
//                 the resulting region mixture is added to every token of the
//                 chunk. Marker and image rows pass through unchanged.
// The final output concatenates the cross-chunk and cross-modal results
// feature-wise and projects 2d -> d.

#pragma once

#include <vector>

#include "calec/model/config.hpp"
#include "calec/model/encoder.hpp"
#include "calec/text/chunker.hpp"

namespace calec {

// Per-chunk target candidate index in [0, N] (0 = global feature), or -1.
struct AlignmentLabels {
  std::vector<int> targets;

  bool any_labeled() const;
  void validate(int chunk_count, int candidate_count) const;  // throws DataError
};

struct CsiOutputs {
  Var output;       // O^C = LN(merge([cross_chunk ; cross_modal])), LN optional
  Var cross_chunk;  // output of the cross-chunk stack
  Var cross_modal;  // output of the cross-modal stack
  std::vector<Var> within_weights;  // per within-chunk layer, L x L
  std::vector<Var> modal_scores;    // per cross-modal layer, K x (N+1), pre-softmax
  std::vector<Var> modal_weights;   // per cross-modal layer, K x (N+1), rows sum to 1
};

// Attention mask of the within-chunk stage for a joint sequence.
Mask within_chunk_mask(const ChunkSpans& spans, int content_length, int candidate_count);

// K x M averaging matrix applied by pool_chunks.
Mat pooling_matrix(const ChunkSpans& spans, int content_length);

// v_k = mean of token rows in span k. `tokens` holds the M content rows.
Var pool_chunks(const Var& tokens, const ChunkSpans& spans);

class CrossModalLayer {
 public:
  struct Output {
    Var hidden;
    Var update;  // pre-residual attention update, zero outside content rows
    Var scores;
    Var weights;
  };

  CrossModalLayer() = default;
  CrossModalLayer(ParameterStore& store, Initializer& init, const std::string& name,
                  const ModelConfig& config);
  Output operator()(const Var& h, const ChunkSpans& spans, int content_length,
                    int candidate_count) const;

 private:
  nn::LayerNorm ln_attn_, ln_ffn_;
  nn::Attention attn_;
  nn::FeedForward ffn_;
};

class ChunkInteractor {
 public:
  ChunkInteractor() = default;
  ChunkInteractor(ParameterStore& store, Initializer& init, const ModelConfig& config);

  nn::TransformerLayer::Output within_chunk_layer(size_t layer, const Var& h,
                                                  const ChunkSpans& spans, int content_length,
                                                  int candidate_count) const;
  nn::TransformerLayer::Output cross_chunk_layer(size_t layer, const Var& h) const;
  CrossModalLayer::Output cross_modal_layer(size_t layer, const Var& h, const ChunkSpans& spans,
                                            int content_length, int candidate_count) const;

  // Throws SpanError if the spans do not tile the content tokens.
  CsiOutputs forward(const JointSequence& joint, const ChunkSpans& spans) const;
  CsiOutputs forward(const Var& joint, const ChunkSpans& spans, int content_length,
                     int candidate_count) const;

  const nn::Linear& merge() const { return merge_; }
  size_t within_layers() const { return within_.size(); }
  size_t cross_chunk_layers() const { return cross_chunk_.size(); }
  size_t cross_modal_layers() const { return cross_modal_.size(); }

 private:
  std::vector<nn::TransformerLayer> within_;
  std::vector<nn::TransformerLayer> cross_chunk_;
  std::vector<CrossModalLayer> cross_modal_;
  nn::Linear merge_;
  nn::LayerNorm ln_final_;
  bool final_norm_ = false;
};

// Cross-entropy between the layer-summed chunk->candidate scores (softmax over
// N+1 candidates) and the labels, averaged over labeled chunks. Throws
// EmptyLabelError when nothing is labeled.
Var alignment_loss(const std::vector<Var>& layer_scores, const AlignmentLabels& labels);

// Layer-summed scores, used for argmax alignment predictions.
Mat summed_alignment_scores(const std::vector<Var>& layer_scores);

}  // namespace calec
