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

#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "calec/errors.hpp"
#include "calec/model/model.hpp"
#include "test_util.hpp"

namespace calec {
namespace {

using test::param;
using test::random_mat;
using test::set_param;

Vocabulary toy_vocab() { return Vocabulary({"a", "dog", "runs", "fast", "cat", "red", "big"}); }

ModelConfig generator_config(int vocab_size, int layers = 1) {
  ModelConfig c;
  c.vocab_size = vocab_size;
  c.dim = 4;
  c.feature_dim = 3;
  c.backbone_layers = 1;
  c.within_chunk_layers = 1;
  c.cross_chunk_layers = 1;
  c.cross_modal_layers = 1;
  c.inferrer_layers = 1;
  c.decoder_layers = layers;
  c.max_decoder_positions = 16;
  c.seed = 13;
  return c;
}

TEST(ConstraintSet, StrictlyAboveMedian) {
  const Vocabulary v = toy_vocab();
  auto seq = TokenSequence::from_words({"a", "dog", "runs", "fast", "cat"}, v);
  auto s = build_constraint_set(std::vector<double>{0.1, 0.5, 0.9, 0.4, 0.3}, seq);
  EXPECT_DOUBLE_EQ(s.median, 0.4);
  EXPECT_EQ(s.ids, (std::vector<int>{v.id("dog"), v.id("runs")}));
  EXPECT_FALSE(s.contains(v.id("fast")));
}

TEST(ConstraintSet, AllEqualScoresGiveEmptySet) {
  const Vocabulary v = toy_vocab();
  auto seq = TokenSequence::from_words({"a", "dog", "runs", "fast"}, v);
  EXPECT_TRUE(build_constraint_set(std::vector<double>(4, 0.25), seq).empty());
}

TEST(ConstraintSet, DuplicatesKeepEverySourcePosition) {
  const Vocabulary v = toy_vocab();
  auto seq = TokenSequence::from_words({"dog", "a", "dog", "runs"}, v);
  auto s = build_constraint_set(std::vector<double>{0.9, 0.1, 0.8, 0.2}, seq);
  EXPECT_EQ(s.ids, (std::vector<int>{v.id("dog")}));
  EXPECT_EQ(s.sources.at(v.id("dog")), (std::vector<int>{0, 2}));
  for (int id : s.ids) EXPECT_FALSE(v.is_special(id));
}

TEST(ConstraintSet, MatchesSortOracleOnRandomInstances) {
  const Vocabulary v = toy_vocab();
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const int m = 1 + trial % 7;
    std::vector<std::string> words;
    std::vector<double> scores;
    for (int i = 0; i < m; ++i) {
      words.push_back(v.word(Vocabulary::kNumSpecial + static_cast<int>(rng() % 7)));
      scores.push_back(std::round(unit_uniform(rng) * 8.0) / 8.0);
    }
    auto seq = TokenSequence::from_words(words, v);
    std::vector<double> sorted = scores;
    std::sort(sorted.begin(), sorted.end());
    const double median = m % 2 ? sorted[static_cast<size_t>(m / 2)]
                                : (sorted[static_cast<size_t>(m / 2 - 1)] + sorted[static_cast<size_t>(m / 2)]) / 2.0;
    std::vector<int> expect;
    for (int i = 0; i < m; ++i) {
      if (scores[static_cast<size_t>(i)] > median) expect.push_back(seq.content_id(i));
    }
    std::sort(expect.begin(), expect.end());
    expect.erase(std::unique(expect.begin(), expect.end()), expect.end());
    auto s = build_constraint_set(scores, seq);
    EXPECT_EQ(s.median, median);
    EXPECT_EQ(s.ids, expect);
  }
}

TEST(ConstraintSet, Errors) {
  const Vocabulary v = toy_vocab();
  auto seq = TokenSequence::from_words({"dog"}, v);
  EXPECT_THROW(build_constraint_set(std::vector<double>{0.1, 0.2}, seq), ShapeError);
}

TEST(LexicalProb, SharedTokenCollectsAllMass) {
  const int dog = 5;
  Mat scores(1, 2);
  scores << std::log(0.3), std::log(0.7);
  auto out = lexical_prob(Var(scores), {true, true}, std::vector<int>{dog, dog}, 8);
  EXPECT_NEAR(out.constrained.value()(0, 0), 0.3, 1e-15);
  EXPECT_NEAR(out.p_lex.value()(0, dog), 1.0, 1e-15);
}

TEST(LexicalProb, TokensOutsideSetGetNothing) {
  auto out = lexical_prob(Var(random_mat(2, 4, 2)), {true, false, true, false},
                          std::vector<int>{4, 5, 6, 7}, 8);
  for (int r = 0; r < 2; ++r) {
    EXPECT_EQ(out.p_lex.value()(r, 5), 0.0);
    EXPECT_EQ(out.p_lex.value()(r, 7), 0.0);
    EXPECT_EQ(out.constrained.value()(r, 1), 0.0);
    EXPECT_EQ(out.constrained.value()(r, 3), 0.0);
  }
}

TEST(LexicalProb, MatchesMaskSoftmaxScatterOracle) {
  Mat scores = random_mat(3, 4, 3) * 2.0;
  const std::vector<bool> allowed{true, true, false, true};
  const std::vector<int> ids{6, 4, 5, 6};
  auto out = lexical_prob(Var(scores), allowed, ids, 8);
  for (int r = 0; r < 3; ++r) {
    double z = 0.0;
    for (int p = 0; p < 4; ++p) z += allowed[static_cast<size_t>(p)] ? std::exp(scores(r, p)) : 0.0;
    RowVec expect = RowVec::Zero(8);
    for (int p = 0; p < 4; ++p) {
      if (allowed[static_cast<size_t>(p)]) expect(ids[static_cast<size_t>(p)]) += std::exp(scores(r, p)) / z;
    }
    EXPECT_LT((out.p_lex.value().row(r) - expect).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_NEAR(out.p_lex.value().row(r).sum(), 1.0, 1e-12);
  }
}

TEST(LexicalProb, EmptySetIsZeroMeasure) {
  auto out = lexical_prob(Var(random_mat(2, 2, 4)), {false, false}, std::vector<int>{4, 5}, 8);
  EXPECT_TRUE(out.p_lex.value().isZero(0.0));
}

TEST(Gate, ZeroProjectionGivesHalf) {
  CalecModel m(generator_config(10));
  set_param(m.params(), "lecg.gate.weight", Mat::Zero(12, 1));
  set_param(m.params(), "lecg.gate.bias", Mat::Zero(1, 1));
  Var p = constraint_gate(m.generator().gate_projection(), Var(random_mat(2, 4, 5)),
                          Var(random_mat(2, 4, 6)), Var(random_mat(2, 4, 7)), false);
  EXPECT_EQ(p.value(), Mat::Constant(2, 1, 0.5));
}

TEST(Gate, EmptySetForcesOne) {
  CalecModel m(generator_config(10));
  Var p = constraint_gate(m.generator().gate_projection(), Var(random_mat(3, 4, 8)),
                          Var(random_mat(3, 4, 9)), Var(random_mat(3, 4, 10)), true);
  EXPECT_EQ(p.value(), Mat::Ones(3, 1));
}

TEST(Gate, MatchesConcatLinearSigmoidOracle) {
  CalecModel m(generator_config(10));
  set_param(m.params(), "lecg.gate.bias", random_mat(1, 1, 11));
  Mat c = random_mat(2, 4, 12), h = random_mat(2, 4, 13), x = random_mat(2, 4, 14);
  Var p = constraint_gate(m.generator().gate_projection(), Var(c), Var(h), Var(x), false);
  Mat cat(2, 12);
  cat << c, h, x;
  Mat z = test::add_bias(test::naive_matmul(cat, param(m.params(), "lecg.gate.weight")),
                         param(m.params(), "lecg.gate.bias"));
  for (int r = 0; r < 2; ++r) EXPECT_NEAR(p.value()(r, 0), 1.0 / (1.0 + std::exp(-z(r, 0))), 1e-15);
}

TEST(Mix, Examples) {
  Mat pv = Mat::Constant(1, 5, 0.2), pl = Mat::Zero(1, 5);
  pl(0, 1) = 0.6;
  pl(0, 2) = 0.4;
  EXPECT_EQ(mix(Var(pv), Var(pl), Var(Mat::Ones(1, 1))).value(), pv);
  EXPECT_NEAR(mix(Var(pv), Var(pl), Var(Mat::Constant(1, 1, 0.5))).value()(0, 1), 0.4, 1e-15);
}

TEST(Mix, RandomDistributionsStayNormalized) {
  std::mt19937_64 rng(15);
  for (int trial = 0; trial < 100; ++trial) {
    Mat pv = random_mat(1, 9, 100 + trial).cwiseAbs(), pl = random_mat(1, 9, 300 + trial).cwiseAbs();
    pv /= pv.sum();
    pl /= pl.sum();
    Mat p = mix(Var(pv), Var(pl), Var(Mat::Constant(1, 1, unit_uniform(rng)))).value();
    EXPECT_NEAR(p.sum(), 1.0, 1e-9);
    EXPECT_GE(p.minCoeff(), 0.0);
  }
}

TEST(Mix, GateIsMonotoneForConstraintToken) {
  Mat pv = Mat::Constant(1, 4, 0.25), pl = Mat::Zero(1, 4);
  pl(0, 2) = 1.0;
  double previous = 2.0;
  for (double g = 0.0; g <= 1.0; g += 0.1) {
    const double p = mix(Var(pv), Var(pl), Var(Mat::Constant(1, 1, g))).value()(0, 2);
    EXPECT_LT(p, previous);
    previous = p;
  }
}

// One-layer decoder composed by hand from the stored weights.
Mat naive_decoder_probs(const ParameterStore& s, const std::vector<int>& ids, const Mat& ow,
                        Mat* cross_weights) {
  const int n = static_cast<int>(ids.size());
  Mat h(n, 4);
  for (int t = 0; t < n; ++t) {
    h.row(t) = param(s, "lecg.embed.token").row(ids[static_cast<size_t>(t)]) +
               param(s, "lecg.embed.position").row(t);
  }
  auto ln = [&](const std::string& p, const Mat& x) {
    return test::naive_layer_norm(x, param(s, p + ".gain"), param(s, p + ".bias"));
  };
  const std::string l = "lecg.layer0";
  Mask causal(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) causal(i, j) = j <= i;
  }
  Mat x = ln(l + ".ln_self", h);
  h += test::naive_attention(x * param(s, l + ".self_attn.wq"), x * param(s, l + ".self_attn.wk"),
                             x * param(s, l + ".self_attn.wv"), causal);
  Mat y = ln(l + ".ln_cross", h);
  h += test::naive_attention(y * param(s, l + ".cross_attn.wq"), ow * param(s, l + ".cross_attn.wk"),
                             ow * param(s, l + ".cross_attn.wv"), Mask::Constant(n, ow.rows(), true),
                             cross_weights);
  h += test::naive_ffn(s, l + ".ffn", ln(l + ".ln_ffn", h));
  Mat logits = test::add_bias(ln("lecg.ln_final", h) * param(s, "lecg.head.weight"),
                              param(s, "lecg.head.bias"));
  return test::naive_masked_softmax(logits, Mask::Constant(n, logits.cols(), true));
}

TEST(Decoder, MatchesHandComposedOracle) {
  CalecModel m(generator_config(10));
  set_param(m.params(), "lecg.head.bias", random_mat(1, 10, 16));
  const std::vector<int> ids{Vocabulary::kBos, 5, 7, 4};
  Mat ow = random_mat(6, 4, 17);
  Mat expect_w;
  Mat expect = naive_decoder_probs(m.params(), ids, ow, &expect_w);
  auto pass = m.generator().decode(ids, Var(ow));
  EXPECT_LT((pass.p_vocab.value() - expect).cwiseAbs().maxCoeff(), 1e-13);
  EXPECT_LT((pass.cross_weights.value() - expect_w).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Decoder, RepeatedMemoryRowGivesUniformCrossAttention) {
  CalecModel m(generator_config(10, 2));
  Mat ow = random_mat(1, 4, 18).replicate(6, 1);
  auto pass = m.generator().decode(std::vector<int>{Vocabulary::kBos, 6}, Var(ow));
  for (int j = 0; j < 6; ++j) EXPECT_NEAR(pass.cross_weights.value()(1, j), 1.0 / 6.0, 1e-14);
}

TEST(Decoder, FutureTokensDoNotLeakIntoEarlierSteps) {
  CalecModel m(generator_config(10, 2));
  Mat ow = random_mat(4, 4, 19);
  auto a = m.generator().decode(std::vector<int>{Vocabulary::kBos, 5, 6, 7}, Var(ow));
  auto b = m.generator().decode(std::vector<int>{Vocabulary::kBos, 5, 9, 4}, Var(ow));
  EXPECT_EQ(a.p_vocab.value().topRows(2), b.p_vocab.value().topRows(2));
  EXPECT_NE(a.p_vocab.value().row(3), b.p_vocab.value().row(3));
}

TEST(Decoder, Errors) {
  CalecModel m(generator_config(10));
  EXPECT_THROW(m.generator().decode(std::vector<int>{10}, Var(random_mat(2, 4, 20))), VocabError);
  EXPECT_THROW(m.generator().decode(std::vector<int>{}, Var(random_mat(2, 4, 20))), DataError);
}

TEST(GenerationPass, StepDistributionsAreValid) {
  const Vocabulary v = toy_vocab();
  CalecModel m(generator_config(v.size(), 2));
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::string> words;
    for (int i = 0; i < 5; ++i) words.push_back(v.word(Vocabulary::kNumSpecial + static_cast<int>(rng() % 7)));
    auto seq = TokenSequence::from_words(words, v);
    std::vector<double> sal(5);
    for (double& x : sal) x = unit_uniform(rng);
    auto state = build_constraint_set(sal, seq);
    const auto positions = ow_position_ids(seq);
    std::vector<int> prefix{Vocabulary::kBos, seq.content_id(0), seq.content_id(2)};
    auto out = m.generator().step(prefix, Var(random_mat(10, 4, 400 + trial)), state, positions);
    double total = 0.0, lex = 0.0;
    for (double p : out.p) total += p;
    for (double p : out.p_lex) lex += p;
    EXPECT_NEAR(total, 1.0, 1e-6);
    EXPECT_NEAR(lex, state.empty() ? 0.0 : 1.0, 1e-6);
    for (size_t pos = 0; pos < positions.size(); ++pos) {
      if (!state.contains(positions[pos])) {
        EXPECT_EQ(out.constrained[pos], 0.0);
      }
    }
    EXPECT_GT(out.p_con, 0.0);
    EXPECT_LE(out.p_con, 1.0);
  }
}

TEST(GenerationLoss, CertainTargetsGiveZeroLoss) {
  ModelConfig c = generator_config(10);
  CalecModel m(c);
  set_param(m.params(), "lecg.head.weight", Mat::Zero(4, 10));
  Mat bias = Mat::Constant(1, 10, -60.0);
  bias(0, 7) = 60.0;
  set_param(m.params(), "lecg.head.bias", bias);
  const std::vector<int> prefix{Vocabulary::kBos, 5}, target{7, 7, 7};
  EXPECT_LT(m.generator().generation_loss(prefix, target, Var(random_mat(2, 4, 22)), {},
                                          std::vector<int>{5, 5})
                .item(),
            1e-20);
}

TEST(GenerationLoss, UniformVocabularyGivesLengthTimesLogV) {
  CalecModel m(generator_config(10));
  set_param(m.params(), "lecg.head.weight", Mat::Zero(4, 10));
  set_param(m.params(), "lecg.head.bias", Mat::Zero(1, 10));
  const std::vector<int> prefix{Vocabulary::kBos, 5}, target{4, 8, 6, Vocabulary::kEos};
  EXPECT_NEAR(m.generator()
                  .generation_loss(prefix, target, Var(random_mat(2, 4, 23)), {}, std::vector<int>{5, 5})
                  .item(),
              4.0 * std::log(10.0), 1e-12);
}

TEST(GenerationLoss, MatchesPerStepNegativeLogSum) {
  const Vocabulary v = toy_vocab();
  CalecModel m(generator_config(v.size(), 2));
  auto seq = TokenSequence::from_words({"dog", "runs", "fast"}, v);
  auto state = build_constraint_set(std::vector<double>{0.9, 0.2, 0.5}, seq);
  const auto positions = ow_position_ids(seq);
  Mat ow = random_mat(6, 4, 24);
  const std::vector<int> prefix{Vocabulary::kBos, v.id("dog"), v.id("runs")};
  const std::vector<int> target{v.id("dog"), v.id("cat"), Vocabulary::kEos};
  double expect = 0.0;
  std::vector<int> sent = prefix;
  for (int t : target) {
    auto out = m.generator().step(sent, Var(ow), state, positions);
    expect -= std::log(out.p[static_cast<size_t>(t)]);
    sent.push_back(t);
  }
  EXPECT_NEAR(m.generator().generation_loss(prefix, target, Var(ow), state, positions).item(), expect,
              1e-12);
}

TEST(GenerationLoss, DisabledMixtureUsesVocabularyOnly) {
  const Vocabulary v = toy_vocab();
  ModelConfig c = generator_config(v.size());
  c.lexical_mixture = false;
  CalecModel m(c);
  auto seq = TokenSequence::from_words({"dog", "runs"}, v);
  auto state = build_constraint_set(std::vector<double>{0.9, 0.1}, seq);
  auto out = m.generator().step(std::vector<int>{Vocabulary::kBos}, Var(random_mat(4, 4, 25)), state,
                                ow_position_ids(seq));
  EXPECT_EQ(out.p_con, 1.0);
  EXPECT_EQ(out.p, out.p_vocab);
}

}  // namespace
}  // namespace calec
