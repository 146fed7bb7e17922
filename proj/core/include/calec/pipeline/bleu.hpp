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

#pragma once

#include <string>
#include <vector>

namespace calec {

// Sentence BLEU-4 against one or more references: clipped n-gram precisions
// for n = 1..4, uniform weights, brevity penalty against the reference whose
// length is closest to the candidate (shorter wins ties). Orders 2..4 with no
// match use (0 + 1) / (total + 1); a zero unigram precision gives 0.
// An empty candidate scores 0. Throws DataError on an empty reference set.
double bleu4(const std::vector<std::string>& candidate,
             const std::vector<std::vector<std::string>>& references);

}  // namespace calec
