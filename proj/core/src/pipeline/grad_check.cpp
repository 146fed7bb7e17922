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

#include "calec/pipeline/grad_check.hpp"

#include <algorithm>
#include <random>

#include "calec/errors.hpp"
#include "calec/model/model.hpp"
#include "calec/numerics/params.hpp"

namespace calec {

namespace {

int draw(std::mt19937_64& rng, int lo, int hi) {  // inclusive range
  return lo + std::min(hi - lo, static_cast<int>(unit_uniform(rng) * (hi - lo + 1)));
}

std::vector<std::pair<std::string, Var>> with_prefixes(const ParameterStore& store,
                                                       std::initializer_list<const char*> prefixes) {
  std::vector<std::pair<std::string, Var>> out;
  for (const auto& [name, v] : store.all()) {
    for (const char* p : prefixes) {
      if (name.rfind(p, 0) == 0) {
        out.emplace_back(name, v);
        break;
      }
    }
  }
  return out;
}

}  // namespace

double ModelGradCheck::max_relative_error() const {
  return std::max({alignment.max_relative_error, stage1.max_relative_error,
                   stage2.max_relative_error});
}

ModelConfig grad_check_config(const GradCheckInstance& instance) {
  ModelConfig c;
  c.vocab_size = instance.vocab_size;
  c.dim = instance.dim;
  c.feature_dim = instance.feature_dim;
  c.max_text_positions = instance.content_length + 2;
  c.max_decoder_positions = instance.content_length + instance.explanation_length + 4;
  c.backbone_layers = 1;
  c.within_chunk_layers = 1;
  c.cross_chunk_layers = 1;
  c.cross_modal_layers = 2;
  c.inferrer_layers = 2;
  c.decoder_layers = 2;
  c.seed = instance.seed;
  return c;
}

ModelGradCheck run_grad_checks(const GradCheckInstance& instance, double epsilon) {
  const ModelConfig config = grad_check_config(instance);
  CalecModel model(config);
  std::mt19937_64 rng(instance.seed ^ 0x9E3779B97F4A7C15ULL);

  std::vector<std::string> words;
  for (int i = 0; i < instance.vocab_size - Vocabulary::kNumSpecial; ++i) {
    words.push_back("w" + std::to_string(i));
  }
  const Vocabulary vocab(words);
  std::vector<std::string> sentence;
  for (int i = 0; i < instance.content_length; ++i) {
    sentence.push_back(words[static_cast<size_t>(draw(rng, 0, static_cast<int>(words.size()) - 1))]);
  }
  const TokenSequence seq = TokenSequence::from_words(sentence, vocab);

  ChunkSpans spans;
  for (int start = 0; start < instance.content_length;) {
    const int end = std::min(instance.content_length, start + draw(rng, 1, 3));
    spans.push_back({start, end});
    start = end;
  }
  RegionSet regions;
  regions.features.resize(instance.regions + 1, instance.feature_dim);
  for (Eigen::Index i = 0; i < regions.features.size(); ++i) {
    regions.features.data()[i] = 2.0 * unit_uniform(rng) - 1.0;
  }
  AlignmentLabels align;
  for (size_t k = 0; k < spans.size(); ++k) align.targets.push_back(draw(rng, -1, instance.regions));
  if (!align.any_labeled()) align.targets[0] = 1;
  const int label = draw(rng, 0, config.num_relations - 1);

  ModelGradCheck out;
  out.alignment = grad_check(
      [&] { return alignment_loss(model.encode_csi(seq, spans, regions).modal_scores, align); },
      with_prefixes(model.params(), {kEmbedPrefix, kCsiPrefix}), epsilon);
  out.stage1 = grad_check(
      [&] { return inference_loss(model.encode(seq, spans, regions).fused.logits, label); },
      with_prefixes(model.params(), {kEmbedPrefix, kBackbonePrefix, kCsiPrefix, kInferrerPrefix}),
      epsilon);

  // Stage 2 sees the encoder as constant, exactly as in training.
  Var ow;
  ConstraintState constraints;
  {
    NoGradGuard no_grad;
    const EncodedInput e = model.encode(seq, spans, regions);
    ow = Var(e.fused.ow.value());
    constraints = build_constraint_set(token_saliency(e.fused.alphas, seq.content_length()), seq);
  }
  if (constraints.empty()) throw NumericError("grad check instance produced an empty constraint set");
  const std::vector<int> positions = ow_position_ids(seq);
  std::vector<int> prefix{Vocabulary::kBos};
  for (int i = 0; i < seq.content_length(); ++i) prefix.push_back(seq.content_id(i));
  std::vector<int> target;
  for (int t = 0; t < instance.explanation_length; ++t) {
    // Half the targets are copied from the constraint set so P_lex carries mass on them.
    target.push_back(t % 2 == 0 ? constraints.ids[static_cast<size_t>(t / 2) % constraints.ids.size()]
                                : draw(rng, Vocabulary::kNumSpecial, instance.vocab_size - 1));
  }
  target.push_back(Vocabulary::kEos);
  out.stage2 = grad_check(
      [&] { return model.generator().generation_loss(prefix, target, ow, constraints, positions); },
      with_prefixes(model.params(), {kGeneratorPrefix}), epsilon);
  return out;
}

}  // namespace calec
