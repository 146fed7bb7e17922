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

#include "calec/model/csi.hpp"

#include <string>

#include "calec/errors.hpp"

namespace calec {

namespace {

void require_spans(const ChunkSpans& spans, int content_length) {
  auto report = validate_spans(spans, content_length);
  if (!report.ok) throw SpanError("invalid chunk spans: " + report.message);
}

// L x K matrix copying chunk k's row onto every token row of the chunk.
Mat broadcast_matrix(const ChunkSpans& spans, int length) {
  Mat b = Mat::Zero(length, static_cast<Eigen::Index>(spans.size()));
  for (size_t k = 0; k < spans.size(); ++k) {
    for (int i = spans[k].start; i < spans[k].end; ++i) {
      b(JointSequence::token_row(i), static_cast<Eigen::Index>(k)) = 1.0;
    }
  }
  return b;
}

}  // namespace

bool AlignmentLabels::any_labeled() const {
  for (int t : targets) {
    if (t >= 0) return true;
  }
  return false;
}

void AlignmentLabels::validate(int chunk_count, int candidate_count) const {
  if (static_cast<int>(targets.size()) != chunk_count) {
    throw DataError("alignment labels for " + std::to_string(targets.size()) + " chunks, expected " +
                    std::to_string(chunk_count));
  }
  for (int t : targets) {
    if (t < -1 || t >= candidate_count) {
      throw DataError("alignment target " + std::to_string(t) + " outside [0, " +
                      std::to_string(candidate_count) + ")");
    }
  }
}

Mask within_chunk_mask(const ChunkSpans& spans, int content_length, int candidate_count) {
  require_spans(spans, content_length);
  const int text = content_length + 2;
  const int length = text + candidate_count;
  Mask m = Mask::Constant(length, length, false);
  m(0, 0) = true;
  m(text - 1, text - 1) = true;
  for (const Span& s : spans) {
    for (int i = s.start; i < s.end; ++i) {
      for (int j = s.start; j < s.end; ++j) {
        m(JointSequence::token_row(i), JointSequence::token_row(j)) = true;
      }
    }
  }
  m.bottomRightCorner(candidate_count, candidate_count).setConstant(true);
  return m;
}

Mat pooling_matrix(const ChunkSpans& spans, int content_length) {
  require_spans(spans, content_length);
  Mat p = Mat::Zero(static_cast<Eigen::Index>(spans.size()), content_length);
  for (size_t k = 0; k < spans.size(); ++k) {
    const double w = 1.0 / spans[k].length();
    for (int i = spans[k].start; i < spans[k].end; ++i) p(static_cast<Eigen::Index>(k), i) = w;
  }
  return p;
}

Var pool_chunks(const Var& tokens, const ChunkSpans& spans) {
  return ops::matmul(Var(pooling_matrix(spans, static_cast<int>(tokens.rows()))), tokens);
}

CrossModalLayer::CrossModalLayer(ParameterStore& store, Initializer& init,
                                 const std::string& name, const ModelConfig& config)
    : ln_attn_(store, name + ".ln_attn", config.dim),
      ln_ffn_(store, name + ".ln_ffn", config.dim),
      attn_(store, init, name + ".attn", config.dim, config.heads),
      ffn_(store, init, name + ".ffn", config.dim, config.ffn_mult, config.bias) {}

CrossModalLayer::Output CrossModalLayer::operator()(const Var& h, const ChunkSpans& spans,
                                                    int content_length,
                                                    int candidate_count) const {
  const int length = content_length + 2 + candidate_count;
  if (h.rows() != length) throw ShapeError("cross-modal layer: unexpected sequence length");
  Var x = ln_attn_(h);
  Var chunks = pool_chunks(ops::slice_rows(x, 1, content_length), spans);
  Var candidates = ops::slice_rows(x, content_length + 2, candidate_count);
  auto a = attn_(chunks, candidates, nn::full_mask(chunks.rows(), candidate_count));
  Var update =
      ops::matmul(Var(broadcast_matrix(spans, length)), a.output);
  Var mid = ops::add(h, update);

  Mat content_rows = Mat::Zero(length, 1);
  content_rows.block(1, 0, content_length, 1).setOnes();
  Var out = ops::add(mid, ops::scale_rows(ffn_(ln_ffn_(mid)), Var(content_rows)));
  return {out, update, a.scores, a.weights};
}

ChunkInteractor::ChunkInteractor(ParameterStore& store, Initializer& init,
                                 const ModelConfig& config) {
  for (int l = 0; l < config.within_chunk_layers; ++l) {
    within_.emplace_back(store, init, "csi.within" + std::to_string(l), config.dim, config.heads,
                         config.ffn_mult, config.bias);
  }
  for (int l = 0; l < config.cross_chunk_layers; ++l) {
    cross_chunk_.emplace_back(store, init, "csi.cross_chunk" + std::to_string(l), config.dim,
                              config.heads, config.ffn_mult, config.bias);
  }
  for (int l = 0; l < config.cross_modal_layers; ++l) {
    cross_modal_.emplace_back(store, init, "csi.cross_modal" + std::to_string(l), config);
  }
  merge_ = nn::Linear(store, init, "csi.merge", 2 * config.dim, config.dim, config.bias);
  if (config.final_norm) {
    ln_final_ = nn::LayerNorm(store, "csi.ln_final", config.dim);
    final_norm_ = true;
  }
}

nn::TransformerLayer::Output ChunkInteractor::within_chunk_layer(size_t layer, const Var& h,
                                                                 const ChunkSpans& spans,
                                                                 int content_length,
                                                                 int candidate_count) const {
  return within_.at(layer)(h, within_chunk_mask(spans, content_length, candidate_count));
}

nn::TransformerLayer::Output ChunkInteractor::cross_chunk_layer(size_t layer, const Var& h) const {
  return cross_chunk_.at(layer)(h, nn::full_mask(h.rows(), h.rows()));
}

CrossModalLayer::Output ChunkInteractor::cross_modal_layer(size_t layer, const Var& h,
                                                           const ChunkSpans& spans,
                                                           int content_length,
                                                           int candidate_count) const {
  return cross_modal_.at(layer)(h, spans, content_length, candidate_count);
}

CsiOutputs ChunkInteractor::forward(const JointSequence& joint, const ChunkSpans& spans) const {
  return forward(joint.concatenated(), spans, joint.content_length, joint.region_count + 1);
}

CsiOutputs ChunkInteractor::forward(const Var& joint, const ChunkSpans& spans,
                                    int content_length, int candidate_count) const {
  require_spans(spans, content_length);
  CsiOutputs out;
  Var h = joint;
  if (!within_.empty()) {
    const Mask mask = within_chunk_mask(spans, content_length, candidate_count);
    for (const auto& layer : within_) {
      auto r = layer(h, mask);
      h = r.hidden;
      out.within_weights.push_back(r.attention.weights);
    }
  }
  const Mask full = nn::full_mask(h.rows(), h.rows());
  for (const auto& layer : cross_chunk_) h = layer(h, full).hidden;
  out.cross_chunk = h;
  for (const auto& layer : cross_modal_) {
    auto r = layer(h, spans, content_length, candidate_count);
    h = r.hidden;
    out.modal_scores.push_back(r.scores);
    out.modal_weights.push_back(r.weights);
  }
  out.cross_modal = h;
  out.output = merge_(ops::concat_cols({out.cross_chunk, out.cross_modal}));
  if (final_norm_) out.output = ln_final_(out.output);
  return out;
}

Mat summed_alignment_scores(const std::vector<Var>& layer_scores) {
  if (layer_scores.empty()) throw ConfigError("alignment needs at least one cross-modal layer");
  Mat total = layer_scores[0].value();
  for (size_t l = 1; l < layer_scores.size(); ++l) total += layer_scores[l].value();
  return total;
}

Var alignment_loss(const std::vector<Var>& layer_scores, const AlignmentLabels& labels) {
  if (layer_scores.empty()) throw ConfigError("alignment needs at least one cross-modal layer");
  labels.validate(static_cast<int>(layer_scores[0].rows()),
                  static_cast<int>(layer_scores[0].cols()));
  std::vector<int> rows, cols;
  for (size_t k = 0; k < labels.targets.size(); ++k) {
    if (labels.targets[k] >= 0) {
      rows.push_back(static_cast<int>(k));
      cols.push_back(labels.targets[k]);
    }
  }
  if (rows.empty()) throw EmptyLabelError("alignment loss over a record with no labeled chunk");
  Var total = layer_scores[0];
  for (size_t l = 1; l < layer_scores.size(); ++l) total = ops::add(total, layer_scores[l]);
  Var picked = ops::pick(ops::log_softmax_rows(total), rows, cols);
  return ops::affine(ops::mean(picked), -1.0);
}

}  // namespace calec
