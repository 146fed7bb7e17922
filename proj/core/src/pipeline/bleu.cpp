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

#include "calec/pipeline/bleu.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>

#include "calec/errors.hpp"

namespace calec {

namespace {

using Counts = std::map<std::vector<std::string>, int>;

Counts ngrams(const std::vector<std::string>& words, size_t n) {
  Counts c;
  for (size_t i = 0; i + n <= words.size(); ++i) {
    ++c[std::vector<std::string>(words.begin() + static_cast<long>(i),
                                 words.begin() + static_cast<long>(i + n))];
  }
  return c;
}

}  // namespace

double bleu4(const std::vector<std::string>& candidate,
             const std::vector<std::vector<std::string>>& references) {
  if (references.empty()) throw DataError("bleu4 needs at least one reference");
  if (candidate.empty()) return 0.0;

  double log_sum = 0.0;
  for (size_t n = 1; n <= 4; ++n) {
    const Counts cand = ngrams(candidate, n);
    Counts max_ref;
    for (const auto& ref : references) {
      for (const auto& [gram, count] : ngrams(ref, n)) {
        max_ref[gram] = std::max(max_ref[gram], count);
      }
    }
    int matched = 0;
    int total = 0;
    for (const auto& [gram, count] : cand) {
      total += count;
      auto it = max_ref.find(gram);
      if (it != max_ref.end()) matched += std::min(count, it->second);
    }
    double precision;
    if (matched > 0) {
      precision = static_cast<double>(matched) / total;
    } else if (n == 1) {
      return 0.0;
    } else {
      precision = 1.0 / (total + 1);
    }
    log_sum += 0.25 * std::log(precision);
  }

  const auto c = static_cast<long>(candidate.size());
  long r = static_cast<long>(references.front().size());
  for (const auto& ref : references) {
    const auto len = static_cast<long>(ref.size());
    if (std::labs(len - c) < std::labs(r - c) || (std::labs(len - c) == std::labs(r - c) && len < r)) {
      r = len;
    }
  }
  const double bp = c >= r ? 1.0 : std::exp(1.0 - static_cast<double>(r) / static_cast<double>(c));
  return bp * std::exp(log_sum);
}

}  // namespace calec
