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

#include <vector>

#include "calec/model/config.hpp"
#include "calec/nn/layers.hpp"

namespace calec {

struct FusedRepresentation {
  Var o_cls;                 // refined [CLS], 1 x d
  Var ow;                    // 2M x d: backbone token rows, then CSI token rows
  std::vector<Var> alphas;   // per refinement layer, 1 x 2M
  Var logits;                // 1 x n
};

struct RelationPrediction {
  std::vector<double> logits;
  int predicted = 0;
};

// Argmax over logits; the lowest index wins ties.
RelationPrediction classify_logits(const Mat& logits);

// Stacks content-token rows of O^T (first M) and O^C (next M). Both inputs
// are the M content rows only. Throws ShapeError on a row-count mismatch.
Var build_ow(const Var& backbone_tokens, const Var& csi_tokens);

// alpha^S_i = sum over layers of alpha[i] + alpha[M+i].
std::vector<double> token_saliency(const std::vector<Mat>& alphas, int content_length);
std::vector<double> token_saliency(const std::vector<Var>& alphas, int content_length);

// Relation inferrer: fuse the two [CLS] vectors, refine them with repeated
// attention over O^w, then classify.
class RelationInferrer {
 public:
  struct RefineLayer {
    Var wq, wk, wv;
  };

  RelationInferrer() = default;
  RelationInferrer(ParameterStore& store, Initializer& init, const ModelConfig& config);

  // [o^T_CLS ; o^C_CLS] W^p.
  Var fuse_cls(const Var& backbone_cls, const Var& csi_cls) const;
  // Per layer: alpha = softmax((o Wq)(O^w Wk)^T); o <- alpha (O^w Wv) + o.
  std::pair<Var, std::vector<Var>> refine_cls(const Var& o_cls, const Var& ow) const;
  Var logits(const Var& refined) const { return classifier_(refined); }

  // Full pass from the backbone and CSI outputs over the joint sequence.
  FusedRepresentation forward(const Var& backbone_out, const Var& csi_out,
                              int content_length) const;

  size_t layer_count() const { return layer_count_; }
  const RefineLayer& layer(size_t l) const { return layers_.at(shared_ ? 0 : l); }

 private:
  nn::Linear fuse_;
  std::vector<RefineLayer> layers_;
  nn::Linear classifier_;
  size_t layer_count_ = 0;
  bool shared_ = false;
};

// Cross-entropy of the relation logits against the gold label.
Var inference_loss(const Var& logits, int gold);

}  // namespace calec
