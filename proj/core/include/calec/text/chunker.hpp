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

// Rule-based shallow chunking over a tagged lexicon, and the span validator
// every consumer of chunk borders relies on.

#pragma once

#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace calec {

// Half-open chunk [start, end) over content tokens (markers excluded).
struct Span {
  int start = 0;
  int end = 0;
  int length() const { return end - start; }
  bool operator==(const Span&) const = default;
};

using ChunkSpans = std::vector<Span>;

enum class Tag { kDeterminer, kAdjective, kNoun, kAuxiliary, kVerb, kOther };

std::string_view tag_name(Tag tag);
Tag parse_tag(std::string_view name);  // throws TaggingError

class Lexicon {
 public:
  Lexicon() = default;
  explicit Lexicon(std::unordered_map<std::string, Tag> entries) : entries_(std::move(entries)) {}

  // One "word<TAB>TAG" per line; blank lines and '#' comments ignored.
  static Lexicon read(std::istream& in);
  void write(std::ostream& out) const;

  void add(const std::string& word, Tag tag) { entries_[word] = tag; }
  std::optional<Tag> find(const std::string& word) const;
  size_t size() const { return entries_.size(); }

 private:
  std::unordered_map<std::string, Tag> entries_;
};

// Greedy chunking: (DET|ADJ)+ NOUN+ forms a noun chunk, (AUX|VERB)+ forms a
// verb chunk, and every other word is a singleton. A determiner/adjective run
// with no following noun falls back to singletons. Throws TaggingError
// listing every word missing from the lexicon.
ChunkSpans rule_chunk(const std::vector<std::string>& words, const Lexicon& lexicon);

enum class SpanViolationKind { kEmptySpan, kOutOfBounds, kOverlap, kGap, kUnsorted };

struct SpanReport {
  bool ok = true;
  SpanViolationKind kind = SpanViolationKind::kEmptySpan;
  int span_index = -1;  // first offending span
  int token = -1;       // uncovered token for kGap
  std::string message;
};

// Checks that spans are non-empty, in bounds, sorted and cover every content
// token exactly once. Violations are reported, not thrown.
SpanReport validate_spans(const ChunkSpans& spans, int content_length);

// "s:e,s:e" <-> spans. parse_spans throws SpanError on malformed text.
ChunkSpans parse_spans(std::string_view text);
std::string format_spans(const ChunkSpans& spans);

// Index of the chunk containing each content token.
std::vector<int> chunk_of_token(const ChunkSpans& spans, int content_length);

}  // namespace calec
