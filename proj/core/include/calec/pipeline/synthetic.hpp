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

// Synthetic visual-entailment data with planted structure.
//
// Every region is a noun prototype plus a colour prototype plus noise. A
// sentence names one or two coloured nouns; each noun phrase is generated to
// agree with exactly one region (entailment), to share its noun but not its
// colour (contradiction), or to have no region with its noun (neutral). The
// label, the chunk-to-region alignment and a template explanation follow
// mechanically from that construction.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "calec/pipeline/config_file.hpp"
#include "calec/pipeline/dataset.hpp"

namespace calec {

struct SyntheticLexicon {
  std::vector<std::string> determiners, colors, nouns, verbs, prepositions;
  std::vector<std::string> explanation_words;  // words used only by explanations
  static SyntheticLexicon standard();
};

// Prototype vectors behind the region features.
struct SyntheticWorld {
  SyntheticLexicon lexicon;
  Mat noun_protos;   // nouns x f
  Mat color_protos;  // colours x f

  SyntheticWorld(const SyntheticConfig& config);
  // Clean feature of a (noun, colour) region.
  RowVec region(int noun, int color) const;
};

DatasetSplits gen_synthetic(const SyntheticConfig& config);

}  // namespace calec
