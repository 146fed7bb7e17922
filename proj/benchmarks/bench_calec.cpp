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

#include <random>

#include <benchmark/benchmark.h>

#include "calec/decoding/beam.hpp"
#include "calec/model/model.hpp"
#include "calec/numerics/ops.hpp"
#include "calec/numerics/params.hpp"
#include "calec/pipeline/bleu.hpp"
#include "calec/pipeline/synthetic.hpp"
#include "calec/pipeline/training.hpp"

namespace calec {
namespace {

Mat uniform(int rows, int cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = 2.0 * unit_uniform(rng) - 1.0;
  return m;
}

struct Fixture {
  DatasetSplits splits;
  std::vector<PreparedRecord> records;
  std::unique_ptr<CalecModel> model;

  Fixture() {
    SyntheticConfig data;
    data.pretrain_size = data.train_size = data.val_size = data.test_size = 8;
    splits = gen_synthetic(data);
    records = prepare_all(splits.train, splits.vocab, splits.lexicon);
    ModelConfig m;
    m.vocab_size = splits.vocab.size();
    m.feature_dim = splits.feature_dim();
    model = std::make_unique<CalecModel>(m);
  }
};

Fixture& fixture() {
  static Fixture f;
  return f;
}

void BM_Matmul(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Var a(uniform(n, n, 1));
  const Var b(uniform(n, n, 2));
  NoGradGuard no_grad;
  for (auto _ : state) benchmark::DoNotOptimize(ops::matmul(a, b).value().data());
}
BENCHMARK(BM_Matmul)->Arg(32)->Arg(64)->Arg(128);

void BM_Attention(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Var q(uniform(n, 32, 1));
  const Var k(uniform(n, 32, 2));
  const Var v(uniform(n, 32, 3));
  const Mask keep = Mask::Constant(n, n, true);
  NoGradGuard no_grad;
  for (auto _ : state) benchmark::DoNotOptimize(ops::attention(q, k, v, keep).output.value().data());
}
BENCHMARK(BM_Attention)->Arg(16)->Arg(32)->Arg(64);

void BM_EncodeForward(benchmark::State& state) {
  auto& f = fixture();
  const auto& r = f.records[0];
  NoGradGuard no_grad;
  for (auto _ : state) {
    benchmark::DoNotOptimize(f.model->encode(r.seq, r.spans, r.regions).fused.logits.value().data());
  }
}
BENCHMARK(BM_EncodeForward);

void BM_StageOneLossBackward(benchmark::State& state) {
  auto& f = fixture();
  const auto& r = f.records[0];
  for (auto _ : state) {
    f.model->params().zero_grad();
    backward(inference_loss(f.model->encode(r.seq, r.spans, r.regions).fused.logits, r.label));
  }
}
BENCHMARK(BM_StageOneLossBackward);

void BM_GenerationLossBackward(benchmark::State& state) {
  auto& f = fixture();
  const auto examples = build_generator_examples(*f.model, f.records, f.splits.vocab, true);
  const auto& g = examples[0];
  for (auto _ : state) {
    f.model->params().zero_grad();
    backward(f.model->generator().generation_loss(g.prefix, g.target, Var(g.ow), g.constraints,
                                                  g.position_ids));
  }
}
BENCHMARK(BM_GenerationLossBackward);

void BM_ConstrainedBeamSample(benchmark::State& state) {
  const int vocab = 50;
  auto step = [vocab](std::span<const int> prefix) {
    std::mt19937_64 rng(prefix.size() * 7919 + static_cast<std::uint64_t>(prefix.back()));
    std::vector<double> p(static_cast<size_t>(vocab));
    double z = 0.0;
    for (double& x : p) z += (x = unit_uniform(rng));
    for (double& x : p) x /= z;
    return p;
  };
  DecodeConfig c;
  c.beam_size = static_cast<int>(state.range(0));
  c.top_k = 10;
  c.max_length = 20;
  const std::vector<int> prefix{Vocabulary::kBos, 10};
  auto in_s = [](int id) { return id % 5 == 0; };
  for (auto _ : state) {
    benchmark::DoNotOptimize(constrained_beam_sample(step, prefix, in_s, c, 3).sentence.size());
  }
}
BENCHMARK(BM_ConstrainedBeamSample)->Arg(1)->Arg(5)->Arg(10);

void BM_Bleu4(benchmark::State& state) {
  const std::vector<std::string> cand{"the", "red", "dog", "is", "in", "the", "image", "now"};
  const std::vector<std::vector<std::string>> refs{{"the", "red", "dog", "is", "in", "the", "image"}};
  for (auto _ : state) benchmark::DoNotOptimize(bleu4(cand, refs));
}
BENCHMARK(BM_Bleu4);

}  // namespace
}  // namespace calec

BENCHMARK_MAIN();
