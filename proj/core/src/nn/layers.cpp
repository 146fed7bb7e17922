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

#include "calec/nn/layers.hpp"

#include <vector>

#include "calec/errors.hpp"

namespace calec::nn {

Linear::Linear(ParameterStore& store, Initializer& init, const std::string& name,
               Eigen::Index in, Eigen::Index out, bool bias)
    : weight_(store.create(name + ".weight", init.xavier(in, out))) {
  if (bias) bias_ = store.create(name + ".bias", Mat::Zero(1, out));
}

LayerNorm::LayerNorm(ParameterStore& store, const std::string& name, Eigen::Index dim)
    : gain_(store.create(name + ".gain", Mat::Ones(1, dim))),
      bias_(store.create(name + ".bias", Mat::Zero(1, dim))) {}

FeedForward::FeedForward(ParameterStore& store, Initializer& init, const std::string& name,
                         Eigen::Index dim, int mult, bool bias)
    : up_(store, init, name + ".up", dim, dim * mult, bias),
      down_(store, init, name + ".down", dim * mult, dim, bias) {}

Attention::Attention(ParameterStore& store, Initializer& init, const std::string& name,
                     Eigen::Index dim, int heads)
    : wq_(store.create(name + ".wq", init.xavier(dim, dim))),
      wk_(store.create(name + ".wk", init.xavier(dim, dim))),
      wv_(store.create(name + ".wv", init.xavier(dim, dim))),
      heads_(heads) {
  if (heads < 1 || dim % heads != 0) {
    throw ConfigError("attention heads must divide the model dimension");
  }
}

ops::AttentionResult Attention::operator()(const Var& queries, const Var& keys_values,
                                           const Mask& mask) const {
  Var q = ops::matmul(queries, wq_);
  Var k = ops::matmul(keys_values, wk_);
  Var v = ops::matmul(keys_values, wv_);
  if (heads_ == 1) return ops::attention(q, k, v, mask);

  const Eigen::Index width = q.cols() / heads_;
  std::vector<Var> outputs, weights, scores;
  for (int h = 0; h < heads_; ++h) {
    // Column slices via transpose so the autograd only needs row slicing.
    auto cols = [&](const Var& x) {
      return ops::transpose(ops::slice_rows(ops::transpose(x), h * width, width));
    };
    auto r = ops::attention(cols(q), cols(k), cols(v), mask);
    outputs.push_back(r.output);
    weights.push_back(r.weights);
    scores.push_back(r.scores);
  }
  auto average = [&](const std::vector<Var>& xs) {
    Var acc = xs[0];
    for (size_t i = 1; i < xs.size(); ++i) acc = ops::add(acc, xs[i]);
    return ops::affine(acc, 1.0 / static_cast<double>(xs.size()));
  };
  return {ops::concat_cols(outputs), average(weights), average(scores)};
}

TransformerLayer::TransformerLayer(ParameterStore& store, Initializer& init,
                                   const std::string& name, Eigen::Index dim, int heads,
                                   int ffn_mult, bool bias)
    : ln_attn_(store, name + ".ln_attn", dim),
      ln_ffn_(store, name + ".ln_ffn", dim),
      attn_(store, init, name + ".attn", dim, heads),
      ffn_(store, init, name + ".ffn", dim, ffn_mult, bias) {}

TransformerLayer::Output TransformerLayer::operator()(const Var& h, const Mask& mask) const {
  Var x = ln_attn_(h);
  auto a = attn_(x, x, mask);
  Var mid = ops::add(h, a.output);
  Var out = ops::add(mid, ffn_(ln_ffn_(mid)));
  return {out, a};
}

Mask full_mask(Eigen::Index rows, Eigen::Index cols) { return Mask::Constant(rows, cols, true); }

Mask causal_mask(Eigen::Index n) {
  Mask m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = j <= i;
  }
  return m;
}

}  // namespace calec::nn
