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

#include "calec/text/vocabulary.hpp"

#include <algorithm>

#include "calec/errors.hpp"

namespace calec {

Vocabulary::Vocabulary() : Vocabulary(std::vector<std::string>{}) {}

Vocabulary::Vocabulary(const std::vector<std::string>& words) {
  for (const char* special : {"[CLS]", "[SEP]", "[BOS]", "[EOS]"}) {
    index_.emplace(special, static_cast<int>(tokens_.size()));
    tokens_.emplace_back(special);
  }
  for (const auto& w : words) {
    if (index_.emplace(w, static_cast<int>(tokens_.size())).second) tokens_.push_back(w);
  }
}

int Vocabulary::id(std::string_view word) const {
  auto found = find(word);
  if (!found) throw VocabError("word '" + std::string(word) + "' is not in the vocabulary");
  return *found;
}

std::optional<int> Vocabulary::find(std::string_view word) const {
  auto it = index_.find(std::string(word));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const std::string& Vocabulary::word(int id) const {
  if (id < 0 || id >= size()) {
    throw VocabError("id " + std::to_string(id) + " outside vocabulary of " +
                     std::to_string(size()));
  }
  return tokens_[static_cast<size_t>(id)];
}

std::vector<std::string> Vocabulary::words() const {
  return {tokens_.begin() + kNumSpecial, tokens_.end()};
}

std::vector<int> Vocabulary::encode(const std::vector<std::string>& words) const {
  std::vector<int> out;
  out.reserve(words.size());
  for (const auto& w : words) out.push_back(id(w));
  return out;
}

std::vector<std::string> Vocabulary::decode(const std::vector<int>& ids) const {
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (int i : ids) out.push_back(word(i));
  return out;
}

TokenSequence TokenSequence::from_words(const std::vector<std::string>& words,
                                        const Vocabulary& vocab) {
  TokenSequence seq;
  seq.words = words;
  seq.ids.push_back(Vocabulary::kCls);
  for (const auto& w : words) {
    int id = vocab.id(w);
    if (vocab.is_special(id)) throw DataError("marker token '" + w + "' inside sentence text");
    seq.ids.push_back(id);
  }
  seq.ids.push_back(Vocabulary::kSep);
  return seq;
}

void TokenSequence::validate() const {
  if (ids.size() < 2) throw DataError("token sequence shorter than its two markers");
  if (ids.front() != Vocabulary::kCls || ids.back() != Vocabulary::kSep) {
    throw DataError("token sequence must start with [CLS] and end with [SEP]");
  }
  if (std::count(ids.begin(), ids.end(), Vocabulary::kCls) != 1 ||
      std::count(ids.begin(), ids.end(), Vocabulary::kSep) != 1) {
    throw DataError("markers must appear exactly once");
  }
  if (words.size() + 2 != ids.size()) throw DataError("raw words do not match content tokens");
}

}  // namespace calec
