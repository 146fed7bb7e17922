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

// Parameterized building blocks shared by every stack in the model. Each block
// registers its tensors in a ParameterStore under a dotted name prefix and
// keeps Var handles to them, so optimizer updates are visible immediately.

#pragma once

#include <optional>
#include <string>

#include "calec/numerics/ops.hpp"
#include "calec/numerics/params.hpp"

namespace calec::nn {

class Linear {
 public:
  Linear() = default;
  Linear(ParameterStore& store, Initializer& init, const std::string& name, Eigen::Index in,
         Eigen::Index out, bool bias);
  Var operator()(const Var& x) const { return ops::linear(x, weight_, bias_); }
  const Var& weight() const { return weight_; }
  const std::optional<Var>& bias() const { return bias_; }

 private:
  Var weight_;
  std::optional<Var> bias_;
};

class LayerNorm {
 public:
  LayerNorm() = default;
  LayerNorm(ParameterStore& store, const std::string& name, Eigen::Index dim);
  Var operator()(const Var& x) const { return ops::layer_norm(x, gain_, bias_); }

 private:
  Var gain_;
  Var bias_;
};

// Position-wise two-layer GELU network, hidden width = mult * dim.
class FeedForward {
 public:
  FeedForward() = default;
  FeedForward(ParameterStore& store, Initializer& init, const std::string& name,
              Eigen::Index dim, int mult, bool bias);
  Var operator()(const Var& x) const { return down_(ops::gelu(up_(x))); }

 private:
  Linear up_;
  Linear down_;
};

// Bias-free query/key/value projections followed by scaled dot-product
// attention. With heads > 1 the projections are split column-wise, head
// outputs are concatenated, and weights/scores are head-averaged.
class Attention {
 public:
  Attention() = default;
  Attention(ParameterStore& store, Initializer& init, const std::string& name, Eigen::Index dim,
            int heads);
  ops::AttentionResult operator()(const Var& queries, const Var& keys_values,
                                  const Mask& mask) const;

 private:
  Var wq_, wk_, wv_;
  int heads_ = 1;
};

// Pre-norm transformer sublayer stack: h += Attn(LN(h)); h += FFN(LN(h)).
class TransformerLayer {
 public:
  struct Output {
    Var hidden;
    ops::AttentionResult attention;
  };

  TransformerLayer() = default;
  TransformerLayer(ParameterStore& store, Initializer& init, const std::string& name,
                   Eigen::Index dim, int heads, int ffn_mult, bool bias);
  Output operator()(const Var& h, const Mask& mask) const;

 private:
  LayerNorm ln_attn_, ln_ffn_;
  Attention attn_;
  FeedForward ffn_;
};

Mask full_mask(Eigen::Index rows, Eigen::Index cols);
Mask causal_mask(Eigen::Index n);

}  // namespace calec::nn
