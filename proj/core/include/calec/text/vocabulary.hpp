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

#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace calec {

// Word-level vocabulary shared by the encoder and the generator. Ids 0..3 are
// reserved for the marker tokens.
class Vocabulary {
 public:
  static constexpr int kCls = 0;
  static constexpr int kSep = 1;
  static constexpr int kBos = 2;
  static constexpr int kEos = 3;
  static constexpr int kNumSpecial = 4;

  Vocabulary();
  // Specials first, then `words` in the given order (duplicates dropped).
  explicit Vocabulary(const std::vector<std::string>& words);

  int id(std::string_view word) const;  // throws VocabError
  std::optional<int> find(std::string_view word) const;
  const std::string& word(int id) const;
  int size() const { return static_cast<int>(tokens_.size()); }
  bool is_special(int id) const { return id >= 0 && id < kNumSpecial; }
  // Non-special tokens, in id order.
  std::vector<std::string> words() const;

  std::vector<int> encode(const std::vector<std::string>& words) const;
  std::vector<std::string> decode(const std::vector<int>& ids) const;

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

// [CLS] w_1 .. w_M [SEP] as vocabulary ids, with the raw content words.
struct TokenSequence {
  std::vector<int> ids;
  std::vector<std::string> words;

  static TokenSequence from_words(const std::vector<std::string>& words, const Vocabulary& vocab);
  int content_length() const { return static_cast<int>(words.size()); }
  // Vocabulary id of content token i (0-based, markers excluded).
  int content_id(int i) const { return ids[static_cast<size_t>(i) + 1]; }
  // Throws DataError unless markers appear exactly once at both ends.
  void validate() const;
};

}  // namespace calec
