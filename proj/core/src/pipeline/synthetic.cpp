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

#include "calec/pipeline/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "calec/errors.hpp"
#include "calec/numerics/params.hpp"

namespace calec {

namespace {

struct Phrase {
  int noun = 0;
  int color = 0;
};

std::mt19937_64 stream(std::uint64_t seed, std::uint32_t salt) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), salt};
  return std::mt19937_64(seq);
}

int pick(std::mt19937_64& rng, int n) {
  return std::min(n - 1, static_cast<int>(unit_uniform(rng) * n));
}

// Box-Muller on the portable uniform, so the stream is library independent.
double gaussian(std::mt19937_64& rng) {
  const double u1 = 1.0 - unit_uniform(rng);
  const double u2 = unit_uniform(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

Mat gaussian_matrix(std::mt19937_64& rng, int rows, int cols, double scale) {
  Mat m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int k = 0; k < cols; ++k) m(i, k) = scale * gaussian(rng);
  }
  return m;
}

DatasetRecord make_record(const SyntheticWorld& world, const SyntheticConfig& config,
                          std::mt19937_64& rng, const std::string& split, int index) {
  const auto& lex = world.lexicon;
  const int nouns = static_cast<int>(lex.nouns.size());
  const int colors = static_cast<int>(lex.colors.size());
  const int f = config.feature_dim;

  std::vector<Phrase> phrases(unit_uniform(rng) < config.two_phrase_prob ? 2 : 1);
  phrases[0] = {pick(rng, nouns), pick(rng, colors)};
  if (phrases.size() == 2) {
    do {
      phrases[1] = {pick(rng, nouns), pick(rng, colors)};
    } while (phrases[1].noun == phrases[0].noun);
  }
  const int label = pick(rng, kNumRelations);
  const int deciding = pick(rng, static_cast<int>(phrases.size()));

  // Regions planted for the phrases; -1 marks a phrase with no region.
  std::vector<Phrase> regions;
  std::vector<int> phrase_region(phrases.size(), -1);
  for (size_t j = 0; j < phrases.size(); ++j) {
    const bool decides = static_cast<int>(j) == deciding;
    if (decides && label == static_cast<int>(Relation::kNeutral)) continue;
    Phrase r = phrases[j];
    if (decides && label == static_cast<int>(Relation::kContradiction)) {
      r.color = (r.color + 1 + pick(rng, colors - 1)) % colors;
    }
    phrase_region[j] = static_cast<int>(regions.size());
    regions.push_back(r);
  }
  // Same-noun siblings. A contradicted phrase with a sibling has two equally
  // wrong regions, so its alignment is left unlabeled.
  std::vector<bool> ambiguous(phrases.size(), false);
  if (config.hard_negative_prob > 0.0) {
    for (size_t j = 0; j < phrases.size(); ++j) {
      if (phrase_region[j] < 0 || static_cast<int>(regions.size()) >= config.regions) continue;
      if (!(unit_uniform(rng) < config.hard_negative_prob)) continue;
      const Phrase planted = regions[static_cast<size_t>(phrase_region[j])];
      Phrase sibling = planted;
      while (sibling.color == planted.color || sibling.color == phrases[j].color) {
        sibling.color = pick(rng, colors);
      }
      regions.push_back(sibling);
      ambiguous[j] = planted.color != phrases[j].color;
    }
  }
  while (static_cast<int>(regions.size()) < config.regions) {
    Phrase d{pick(rng, nouns), pick(rng, colors)};
    bool mentioned = std::any_of(phrases.begin(), phrases.end(),
                                 [&](const Phrase& p) { return p.noun == d.noun; });
    if (!mentioned) regions.push_back(d);
  }
  // Shuffle region order; Fisher-Yates on the portable uniform.
  std::vector<int> order(regions.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  for (int i = static_cast<int>(order.size()) - 1; i > 0; --i) {
    std::swap(order[static_cast<size_t>(i)], order[static_cast<size_t>(pick(rng, i + 1))]);
  }
  std::vector<int> slot_of(regions.size());
  for (size_t s = 0; s < order.size(); ++s) slot_of[static_cast<size_t>(order[s])] = static_cast<int>(s);

  DatasetRecord r;
  char id[64];
  std::snprintf(id, sizeof id, "%s-%06d", split.c_str(), index);
  r.id = id;
  r.image_id = "img-" + r.id;
  r.label = label;

  const double noise = config.noise / std::sqrt(static_cast<double>(f));
  r.regions.resize(config.regions + 1, f);
  for (int s = 0; s < config.regions; ++s) {
    const Phrase& p = regions[static_cast<size_t>(order[static_cast<size_t>(s)])];
    r.regions.row(s + 1) = world.region(p.noun, p.color);
    for (int k = 0; k < f; ++k) r.regions(s + 1, k) += noise * gaussian(rng);
  }
  r.regions.row(0) = r.regions.bottomRows(config.regions).colwise().mean();
  for (int k = 0; k < f; ++k) r.regions(0, k) += noise * gaussian(rng);

  // "DET COLOR NOUN is VERB [PREP DET COLOR NOUN]"
  ChunkSpans spans;
  std::vector<int> align;
  auto noun_phrase = [&](size_t j) {
    const int start = static_cast<int>(r.words.size());
    r.words.push_back(lex.determiners[static_cast<size_t>(pick(rng, 2))]);
    r.words.push_back(lex.colors[static_cast<size_t>(phrases[j].color)]);
    r.words.push_back(lex.nouns[static_cast<size_t>(phrases[j].noun)]);
    spans.push_back({start, start + 3});
    const int planted = ambiguous[j] ? -1 : phrase_region[j];
    align.push_back(planted < 0 ? -1 : slot_of[static_cast<size_t>(planted)] + 1);
  };
  noun_phrase(0);
  const int verb_start = static_cast<int>(r.words.size());
  r.words.push_back("is");
  r.words.push_back(lex.verbs[static_cast<size_t>(pick(rng, static_cast<int>(lex.verbs.size())))]);
  spans.push_back({verb_start, verb_start + 2});
  align.push_back(-1);
  if (phrases.size() == 2) {
    const int prep = static_cast<int>(r.words.size());
    r.words.push_back(
        lex.prepositions[static_cast<size_t>(pick(rng, static_cast<int>(lex.prepositions.size())))]);
    spans.push_back({prep, prep + 1});
    align.push_back(-1);
    noun_phrase(1);
  }
  r.spans = spans;
  r.align = align;

  // Explanations restate the deciding phrase in the hypothesis' own words; the
  // verb joins it when the deciding phrase is the subject.
  const size_t j = static_cast<size_t>(label == 0 ? 0 : deciding);
  const Span& chunk = spans[j == 0 ? 0 : spans.size() - 1];
  const std::string& det = r.words[static_cast<size_t>(chunk.start)];
  const std::string& color = r.words[static_cast<size_t>(chunk.start + 1)];
  const std::string& noun = r.words[static_cast<size_t>(chunk.start + 2)];
  const std::string& verb = r.words[static_cast<size_t>(verb_start + 1)];
  switch (static_cast<Relation>(label)) {
    case Relation::kEntailment:
      r.explanation = {det, color, noun, "is", verb, "in", "the", "image"};
      break;
    case Relation::kContradiction:
      r.explanation = {"the", noun};
      if (j == 0) r.explanation.push_back(verb);
      r.explanation.insert(r.explanation.end(), {"in", "the", "image", "is", "not", color});
      break;
    case Relation::kNeutral:
      r.explanation = {"there", "is", "no", noun};
      if (j == 0) r.explanation.push_back(verb);
      r.explanation.insert(r.explanation.end(), {"in", "the", "image"});
      break;
  }
  return r;
}

}  // namespace

SyntheticLexicon SyntheticLexicon::standard() {
  SyntheticLexicon l;
  l.determiners = {"a", "the"};
  l.colors = {"red", "blue", "green", "black", "white", "brown", "yellow", "gray"};
  l.nouns = {"dog", "cat", "man", "woman", "car", "ball", "bike", "horse", "bird", "boat",
             "tree", "kite"};
  l.verbs = {"sitting", "standing", "running", "walking"};
  l.prepositions = {"near", "beside", "behind", "under"};
  l.explanation_words = {"in", "image", "not", "there", "no"};
  return l;
}

SyntheticWorld::SyntheticWorld(const SyntheticConfig& config) : lexicon(SyntheticLexicon::standard()) {
  auto rng = stream(config.seed, 0xC0FFEEu);
  const double scale = 1.0 / std::sqrt(static_cast<double>(config.feature_dim));
  noun_protos = gaussian_matrix(rng, static_cast<int>(lexicon.nouns.size()), config.feature_dim, scale);
  color_protos =
      gaussian_matrix(rng, static_cast<int>(lexicon.colors.size()), config.feature_dim,
                      config.color_scale * scale);
}

RowVec SyntheticWorld::region(int noun, int color) const {
  return noun_protos.row(noun) + color_protos.row(color);
}

DatasetSplits gen_synthetic(const SyntheticConfig& config) {
  config.validate();
  SyntheticWorld world(config);
  const auto& lex = world.lexicon;

  DatasetSplits out;
  auto tag_all = [&](const std::vector<std::string>& words, Tag tag) {
    for (const auto& w : words) out.lexicon.add(w, tag);
  };
  tag_all(lex.determiners, Tag::kDeterminer);
  tag_all(lex.colors, Tag::kAdjective);
  tag_all(lex.nouns, Tag::kNoun);
  out.lexicon.add("is", Tag::kAuxiliary);
  tag_all(lex.verbs, Tag::kVerb);
  tag_all(lex.prepositions, Tag::kOther);
  tag_all(lex.explanation_words, Tag::kOther);

  std::vector<std::string> words;
  for (const auto* group : {&lex.determiners, &lex.colors, &lex.nouns}) {
    words.insert(words.end(), group->begin(), group->end());
  }
  words.push_back("is");
  for (const auto* group : {&lex.verbs, &lex.prepositions, &lex.explanation_words}) {
    words.insert(words.end(), group->begin(), group->end());
  }
  for (int i = 0; i < kNumRelations; ++i) words.emplace_back(relation_name(i));
  out.vocab = Vocabulary(words);

  const int sizes[] = {config.pretrain_size, config.train_size, config.val_size, config.test_size};
  std::vector<DatasetRecord>* targets[] = {&out.pretrain, &out.train, &out.val, &out.test};
  for (std::uint32_t s = 0; s < 4; ++s) {
    auto rng = stream(config.seed, s + 1);
    for (int i = 0; i < sizes[s]; ++i) {
      targets[s]->push_back(make_record(world, config, rng, kSplitNames[s], i));
    }
  }
  check_split_disjoint(out);
  return out;
}

}  // namespace calec
