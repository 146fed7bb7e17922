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

// Lexical-constraint-aware generator.
//
// A causal transformer decoder cross-attends over O^w. Its vocabulary
// distribution is mixed with a pointer distribution over the input tokens
// that belong to the constraint set S:
//
//   alpha~  = softmax of final-layer cross-attention scores restricted to
//             positions whose token is in S
//   P_lex   = alpha~ scattered onto vocabulary ids (both O^w copies count)
//   c       = alpha~ O^w
//   p_con   = sigmoid([c; h; x] W^g)
//   P       = p_con P_vocab + (1 - p_con) P_lex
//
// With S empty, p_con is forced to 1 and P = P_vocab.

#pragma once

#include <map>
#include <span>
#include <vector>

#include "calec/model/config.hpp"
#include "calec/nn/layers.hpp"
#include "calec/text/vocabulary.hpp"

namespace calec {

struct ConstraintState {
  std::vector<int> ids;                     // sorted, unique vocabulary ids
  std::map<int, std::vector<int>> sources;  // id -> content positions above the median
  std::vector<double> saliency;
  double median = 0.0;

  bool empty() const { return ids.empty(); }
  bool contains(int id) const;
  // Over the 2M positions of O^w: true where the position's token is in S.
  std::vector<bool> position_mask(std::span<const int> content_ids) const;
};

// Median of the content scores (mean of the middle pair for even M);
// S = ids of tokens scoring strictly above it.
ConstraintState build_constraint_set(std::span<const double> saliency, const TokenSequence& seq);

// Vocabulary id behind each of the 2M positions of O^w.
std::vector<int> ow_position_ids(const TokenSequence& seq);

struct LexicalOutput {
  Var constrained;  // alpha~, T x 2M, zero outside S positions
  Var p_lex;        // T x V
};

// Masks scores to S positions, renormalizes, and scatter-adds onto the
// vocabulary. All rows are zero when no position is allowed.
LexicalOutput lexical_prob(const Var& scores, const std::vector<bool>& allowed,
                           std::span<const int> position_ids, int vocab_size);

// sigmoid([c; h; x] W^g), or a column of ones when the constraint set is empty.
Var constraint_gate(const nn::Linear& projection, const Var& context, const Var& hidden,
                    const Var& inputs, bool constraint_empty);

// Row-wise p_con P_vocab + (1 - p_con) P_lex.
Var mix(const Var& p_vocab, const Var& p_lex, const Var& p_con);

struct DecoderPass {
  Var inputs;         // x_t: token + position embedding, T x d
  Var hidden;         // h^d_t: top layer after the final norm, T x d
  Var cross_scores;   // alpha^c: final-layer cross-attention scores, T x 2M
  Var cross_weights;  // their softmax
  Var p_vocab;        // T x V
};

struct GenerationPass {
  DecoderPass decoder;
  LexicalOutput lexical;
  Var context;  // c_t, T x d
  Var p_con;    // T x 1
  Var p;        // final distribution, T x V
};

// One decoding step, taken from the last row of a GenerationPass.
struct DecoderStepOutput {
  std::vector<double> hidden;
  std::vector<double> cross_scores;
  std::vector<double> constrained;
  std::vector<double> inputs;
  std::vector<double> p_vocab;
  std::vector<double> p_lex;
  double p_con = 1.0;
  std::vector<double> p;
};

class Generator {
 public:
  Generator() = default;
  Generator(ParameterStore& store, Initializer& init, const ModelConfig& config);

  // Decoder stack over `ids` (causal), cross-attending over `ow`.
  DecoderPass decode(std::span<const int> ids, const Var& ow) const;

  // Decoder plus the lexical mixture for every row.
  GenerationPass forward(std::span<const int> ids, const Var& ow, const ConstraintState& state,
                         std::span<const int> position_ids) const;

  DecoderStepOutput step(std::span<const int> prefix, const Var& ow, const ConstraintState& state,
                         std::span<const int> position_ids) const;

  // Teacher-forced sum of -log P(target_t) over target positions only.
  Var generation_loss(std::span<const int> prefix, std::span<const int> target, const Var& ow,
                      const ConstraintState& state, std::span<const int> position_ids) const;

  const nn::Linear& gate_projection() const { return gate_; }
  int vocab_size() const { return vocab_size_; }
  bool lexical_mixture() const { return lexical_mixture_; }

 private:
  struct Layer {
    nn::LayerNorm ln_self, ln_cross, ln_ffn;
    nn::Attention self_attn, cross_attn;
    nn::FeedForward ffn;
  };

  Var tokens_;
  Var positions_;
  std::vector<Layer> layers_;
  nn::LayerNorm ln_final_;
  nn::Linear head_;
  nn::Linear gate_;
  int vocab_size_ = 0;
  bool lexical_mixture_ = true;
};

}  // namespace calec
