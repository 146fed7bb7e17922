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

#include "calec/model/generator.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "calec/errors.hpp"

namespace calec {

namespace {

std::vector<double> row_of(const Var& v, Eigen::Index r) {
  const Mat& m = v.value();
  return {m.row(r).data(), m.row(r).data() + m.cols()};
}

}  // namespace

bool ConstraintState::contains(int id) const {
  return std::binary_search(ids.begin(), ids.end(), id);
}

std::vector<bool> ConstraintState::position_mask(std::span<const int> content_ids) const {
  const size_t m = content_ids.size();
  std::vector<bool> mask(2 * m);
  for (size_t p = 0; p < 2 * m; ++p) mask[p] = contains(content_ids[p % m]);
  return mask;
}

ConstraintState build_constraint_set(std::span<const double> saliency, const TokenSequence& seq) {
  const int m = seq.content_length();
  if (m < 1) throw DataError("constraint set over an empty sentence");
  if (static_cast<int>(saliency.size()) != m) {
    throw ShapeError("saliency has " + std::to_string(saliency.size()) + " scores for " +
                     std::to_string(m) + " tokens");
  }
  ConstraintState s;
  s.saliency.assign(saliency.begin(), saliency.end());
  std::vector<double> sorted = s.saliency;
  std::sort(sorted.begin(), sorted.end());
  const size_t mid = sorted.size() / 2;
  s.median = sorted.size() % 2 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
  for (int i = 0; i < m; ++i) {
    if (s.saliency[static_cast<size_t>(i)] > s.median) s.sources[seq.content_id(i)].push_back(i);
  }
  for (const auto& [id, _] : s.sources) s.ids.push_back(id);
  return s;
}

std::vector<int> ow_position_ids(const TokenSequence& seq) {
  std::vector<int> ids;
  const int m = seq.content_length();
  ids.reserve(static_cast<size_t>(2 * m));
  for (int copy = 0; copy < 2; ++copy) {
    for (int i = 0; i < m; ++i) ids.push_back(seq.content_id(i));
  }
  return ids;
}

LexicalOutput lexical_prob(const Var& scores, const std::vector<bool>& allowed,
                           std::span<const int> position_ids, int vocab_size) {
  const Eigen::Index positions = scores.cols();
  if (static_cast<Eigen::Index>(allowed.size()) != positions ||
      static_cast<Eigen::Index>(position_ids.size()) != positions) {
    throw ShapeError("lexical_prob: " + std::to_string(positions) + " score columns, " +
                     std::to_string(allowed.size()) + " mask entries, " +
                     std::to_string(position_ids.size()) + " position ids");
  }
  Mat scatter = Mat::Zero(positions, vocab_size);
  for (Eigen::Index p = 0; p < positions; ++p) {
    const int id = position_ids[static_cast<size_t>(p)];
    if (id < 0 || id >= vocab_size) throw VocabError("position id outside the vocabulary");
    scatter(p, id) = 1.0;
  }
  if (std::none_of(allowed.begin(), allowed.end(), [](bool b) { return b; })) {
    return {Var(Mat::Zero(scores.rows(), positions)), Var(Mat::Zero(scores.rows(), vocab_size))};
  }
  Mask mask(scores.rows(), positions);
  for (Eigen::Index p = 0; p < positions; ++p) mask.col(p).setConstant(allowed[static_cast<size_t>(p)]);
  Var constrained = ops::masked_softmax_rows(scores, mask);
  return {constrained, ops::matmul(constrained, Var(std::move(scatter)))};
}

Var constraint_gate(const nn::Linear& projection, const Var& context, const Var& hidden,
                    const Var& inputs, bool constraint_empty) {
  if (constraint_empty) return Var(Mat::Ones(hidden.rows(), 1));
  return ops::sigmoid(projection(ops::concat_cols({context, hidden, inputs})));
}

Var mix(const Var& p_vocab, const Var& p_lex, const Var& p_con) {
  return ops::add(ops::scale_rows(p_vocab, p_con),
                  ops::scale_rows(p_lex, ops::affine(p_con, -1.0, 1.0)));
}

Generator::Generator(ParameterStore& store, Initializer& init, const ModelConfig& config)
    : tokens_(store.create("lecg.embed.token", init.xavier(config.vocab_size, config.dim))),
      positions_(store.create("lecg.embed.position",
                              init.xavier(config.max_decoder_positions, config.dim))),
      vocab_size_(config.vocab_size),
      lexical_mixture_(config.lexical_mixture) {
  for (int l = 0; l < config.decoder_layers; ++l) {
    const std::string name = "lecg.layer" + std::to_string(l);
    layers_.push_back({nn::LayerNorm(store, name + ".ln_self", config.dim),
                       nn::LayerNorm(store, name + ".ln_cross", config.dim),
                       nn::LayerNorm(store, name + ".ln_ffn", config.dim),
                       nn::Attention(store, init, name + ".self_attn", config.dim, config.heads),
                       nn::Attention(store, init, name + ".cross_attn", config.dim, config.heads),
                       nn::FeedForward(store, init, name + ".ffn", config.dim, config.ffn_mult,
                                       config.bias)});
  }
  ln_final_ = nn::LayerNorm(store, "lecg.ln_final", config.dim);
  head_ = nn::Linear(store, init, "lecg.head", config.dim, config.vocab_size, config.bias);
  gate_ = nn::Linear(store, init, "lecg.gate", 3 * config.dim, 1, config.bias);
}

DecoderPass Generator::decode(std::span<const int> ids, const Var& ow) const {
  if (ids.empty()) throw DataError("decoder input is empty");
  if (layers_.empty()) throw ConfigError("the generator needs at least one decoder layer");
  const auto n = static_cast<Eigen::Index>(ids.size());
  if (n > positions_.rows()) {
    throw ShapeError("decoder input of " + std::to_string(n) + " tokens exceeds " +
                     std::to_string(positions_.rows()) + " positions");
  }
  for (int id : ids) {
    if (id < 0 || id >= vocab_size_) {
      throw VocabError("decoder id " + std::to_string(id) + " outside vocabulary of " +
                       std::to_string(vocab_size_));
    }
  }
  std::vector<int> pos(ids.size());
  std::iota(pos.begin(), pos.end(), 0);
  DecoderPass pass;
  pass.inputs = ops::add(ops::gather_rows(tokens_, ids), ops::gather_rows(positions_, pos));

  const Mask causal = nn::causal_mask(n);
  const Mask cross = nn::full_mask(n, ow.rows());
  Var h = pass.inputs;
  for (const Layer& layer : layers_) {
    Var x = layer.ln_self(h);
    h = ops::add(h, layer.self_attn(x, x, causal).output);
    auto c = layer.cross_attn(layer.ln_cross(h), ow, cross);
    h = ops::add(h, c.output);
    h = ops::add(h, layer.ffn(layer.ln_ffn(h)));
    pass.cross_scores = c.scores;
    pass.cross_weights = c.weights;
  }
  pass.hidden = ln_final_(h);
  pass.p_vocab = ops::softmax_rows(head_(pass.hidden));
  return pass;
}

GenerationPass Generator::forward(std::span<const int> ids, const Var& ow,
                                  const ConstraintState& state,
                                  std::span<const int> position_ids) const {
  GenerationPass g;
  g.decoder = decode(ids, ow);
  const auto m = position_ids.size() / 2;
  const std::vector<bool> allowed = state.position_mask(position_ids.subspan(0, m));
  g.lexical = lexical_prob(g.decoder.cross_scores, allowed, position_ids, vocab_size_);
  g.context = ops::matmul(g.lexical.constrained, ow);
  const bool forced = state.empty() || !lexical_mixture_;
  g.p_con = constraint_gate(gate_, g.context, g.decoder.hidden, g.decoder.inputs, forced);
  g.p = forced ? g.decoder.p_vocab : mix(g.decoder.p_vocab, g.lexical.p_lex, g.p_con);
  return g;
}

DecoderStepOutput Generator::step(std::span<const int> prefix, const Var& ow,
                                  const ConstraintState& state,
                                  std::span<const int> position_ids) const {
  GenerationPass g = forward(prefix, ow, state, position_ids);
  const Eigen::Index last = static_cast<Eigen::Index>(prefix.size()) - 1;
  DecoderStepOutput out;
  out.hidden = row_of(g.decoder.hidden, last);
  out.cross_scores = row_of(g.decoder.cross_scores, last);
  out.constrained = row_of(g.lexical.constrained, last);
  out.inputs = row_of(g.decoder.inputs, last);
  out.p_vocab = row_of(g.decoder.p_vocab, last);
  out.p_lex = row_of(g.lexical.p_lex, last);
  out.p_con = g.p_con.value()(last, 0);
  out.p = row_of(g.p, last);
  return out;
}

Var Generator::generation_loss(std::span<const int> prefix, std::span<const int> target,
                               const Var& ow, const ConstraintState& state,
                               std::span<const int> position_ids) const {
  if (prefix.empty()) throw DataError("generation prefix is empty");
  if (target.empty()) throw DataError("generation target is empty");
  std::vector<int> ids(prefix.begin(), prefix.end());
  ids.insert(ids.end(), target.begin(), target.end());
  std::span<const int> inputs(ids.data(), ids.size() - 1);
  GenerationPass g = forward(inputs, ow, state, position_ids);
  std::vector<int> rows, cols;
  for (size_t t = prefix.size() - 1; t + 1 < ids.size(); ++t) {
    rows.push_back(static_cast<int>(t));
    cols.push_back(ids[t + 1]);
  }
  return ops::affine(ops::sum(ops::log(ops::pick(g.p, rows, cols))), -1.0);
}

}  // namespace calec
