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

#include "calec/model/inferrer.hpp"

#include <string>

#include "calec/errors.hpp"

namespace calec {

RelationPrediction classify_logits(const Mat& logits) {
  RelationPrediction p;
  p.logits.assign(logits.data(), logits.data() + logits.size());
  for (size_t i = 1; i < p.logits.size(); ++i) {
    if (p.logits[i] > p.logits[static_cast<size_t>(p.predicted)]) p.predicted = static_cast<int>(i);
  }
  return p;
}

Var build_ow(const Var& backbone_tokens, const Var& csi_tokens) {
  if (backbone_tokens.rows() != csi_tokens.rows()) {
    throw ShapeError("build_ow: " + std::to_string(backbone_tokens.rows()) + " vs " +
                     std::to_string(csi_tokens.rows()) + " token rows");
  }
  return ops::concat_rows({backbone_tokens, csi_tokens});
}

std::vector<double> token_saliency(const std::vector<Mat>& alphas, int content_length) {
  if (alphas.empty()) throw ConfigError("token saliency needs at least one refinement layer");
  std::vector<double> s(static_cast<size_t>(content_length), 0.0);
  for (const Mat& a : alphas) {
    if (a.size() != 2 * content_length) {
      throw ShapeError("saliency: attention over " + std::to_string(a.size()) +
                       " positions, expected " + std::to_string(2 * content_length));
    }
    for (int i = 0; i < content_length; ++i) {
      s[static_cast<size_t>(i)] += a.data()[i] + a.data()[content_length + i];
    }
  }
  return s;
}

std::vector<double> token_saliency(const std::vector<Var>& alphas, int content_length) {
  std::vector<Mat> values;
  values.reserve(alphas.size());
  for (const auto& a : alphas) values.push_back(a.value());
  return token_saliency(values, content_length);
}

RelationInferrer::RelationInferrer(ParameterStore& store, Initializer& init,
                                   const ModelConfig& config)
    : fuse_(store, init, "inferrer.fuse", 2 * config.dim, config.dim, config.bias),
      layer_count_(static_cast<size_t>(config.inferrer_layers)),
      shared_(config.inferrer_shared) {
  if (config.inferrer_layers < 1) throw ConfigError("the relation inferrer needs >= 1 layer");
  const int sets = shared_ ? 1 : config.inferrer_layers;
  for (int l = 0; l < sets; ++l) {
    const std::string name = shared_ ? "inferrer.refine" : "inferrer.refine" + std::to_string(l);
    layers_.push_back({store.create(name + ".wq", init.xavier(config.dim, config.dim)),
                       store.create(name + ".wk", init.xavier(config.dim, config.dim)),
                       store.create(name + ".wv", init.xavier(config.dim, config.dim))});
  }
  classifier_ = nn::Linear(store, init, "inferrer.classify", config.dim, config.num_relations,
                           config.bias);
}

Var RelationInferrer::fuse_cls(const Var& backbone_cls, const Var& csi_cls) const {
  if (backbone_cls.rows() != 1 || csi_cls.rows() != 1 || backbone_cls.cols() != csi_cls.cols()) {
    throw ShapeError("fuse_cls expects two 1 x d vectors");
  }
  return fuse_(ops::concat_cols({backbone_cls, csi_cls}));
}

std::pair<Var, std::vector<Var>> RelationInferrer::refine_cls(const Var& o_cls,
                                                              const Var& ow) const {
  Var o = o_cls;
  std::vector<Var> alphas;
  for (size_t l = 0; l < layer_count_; ++l) {
    const RefineLayer& p = layer(l);
    Var scores = ops::matmul(ops::matmul(o, p.wq), ops::transpose(ops::matmul(ow, p.wk)));
    Var alpha = ops::softmax_rows(scores);
    o = ops::add(ops::matmul(alpha, ops::matmul(ow, p.wv)), o);
    alphas.push_back(alpha);
  }
  return {o, alphas};
}

FusedRepresentation RelationInferrer::forward(const Var& backbone_out, const Var& csi_out,
                                              int content_length) const {
  FusedRepresentation f;
  Var o = fuse_cls(ops::slice_rows(backbone_out, 0, 1), ops::slice_rows(csi_out, 0, 1));
  f.ow = build_ow(ops::slice_rows(backbone_out, 1, content_length),
                  ops::slice_rows(csi_out, 1, content_length));
  auto [refined, alphas] = refine_cls(o, f.ow);
  f.o_cls = refined;
  f.alphas = std::move(alphas);
  f.logits = logits(refined);
  return f;
}

Var inference_loss(const Var& logits, int gold) { return ops::cross_entropy(logits, gold); }

}  // namespace calec
