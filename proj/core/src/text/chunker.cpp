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

#include "calec/text/chunker.hpp"

#include <charconv>
#include <map>
#include <sstream>

#include "calec/errors.hpp"

namespace calec {

namespace {

const std::map<Tag, std::string_view>& tag_names() {
  static const std::map<Tag, std::string_view> names = {
      {Tag::kDeterminer, "DET"}, {Tag::kAdjective, "ADJ"}, {Tag::kNoun, "NOUN"},
      {Tag::kAuxiliary, "AUX"},  {Tag::kVerb, "VERB"},     {Tag::kOther, "OTHER"}};
  return names;
}

bool is_modifier(Tag t) { return t == Tag::kDeterminer || t == Tag::kAdjective; }
bool is_verbal(Tag t) { return t == Tag::kAuxiliary || t == Tag::kVerb; }

int parse_int(std::string_view s) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw SpanError("bad span index '" + std::string(s) + "'");
  }
  return value;
}

}  // namespace

std::string_view tag_name(Tag tag) { return tag_names().at(tag); }

Tag parse_tag(std::string_view name) {
  for (const auto& [tag, n] : tag_names()) {
    if (n == name) return tag;
  }
  throw TaggingError("unknown tag '" + std::string(name) + "'");
}

Lexicon Lexicon::read(std::istream& in) {
  Lexicon lex;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) throw TaggingError("lexicon line without a tab: " + line);
    lex.add(line.substr(0, tab), parse_tag(line.substr(tab + 1)));
  }
  return lex;
}

void Lexicon::write(std::ostream& out) const {
  std::map<std::string, Tag> sorted(entries_.begin(), entries_.end());
  for (const auto& [word, tag] : sorted) out << word << '\t' << tag_name(tag) << '\n';
}

std::optional<Tag> Lexicon::find(const std::string& word) const {
  auto it = entries_.find(word);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

ChunkSpans rule_chunk(const std::vector<std::string>& words, const Lexicon& lexicon) {
  if (words.empty()) throw TaggingError("cannot chunk an empty sentence");
  std::vector<Tag> tags;
  std::string missing;
  for (const auto& w : words) {
    auto t = lexicon.find(w);
    if (!t) {
      missing += missing.empty() ? w : ", " + w;
      continue;
    }
    tags.push_back(*t);
  }
  if (!missing.empty()) throw TaggingError("words not in lexicon: " + missing);

  const int n = static_cast<int>(tags.size());
  ChunkSpans spans;
  int i = 0;
  while (i < n) {
    if (is_modifier(tags[i])) {
      int j = i;
      while (j < n && is_modifier(tags[j])) ++j;
      if (j < n && tags[j] == Tag::kNoun) {
        while (j < n && tags[j] == Tag::kNoun) ++j;
        spans.push_back({i, j});
        i = j;
        continue;
      }
      for (; i < j; ++i) spans.push_back({i, i + 1});
      continue;
    }
    if (is_verbal(tags[i])) {
      int j = i;
      while (j < n && is_verbal(tags[j])) ++j;
      spans.push_back({i, j});
      i = j;
      continue;
    }
    spans.push_back({i, i + 1});
    ++i;
  }
  return spans;
}

SpanReport validate_spans(const ChunkSpans& spans, int content_length) {
  auto fail = [](SpanViolationKind kind, int index, int token, std::string msg) {
    SpanReport r;
    r.ok = false;
    r.kind = kind;
    r.span_index = index;
    r.token = token;
    r.message = std::move(msg);
    return r;
  };
  int covered = 0;  // tokens [0, covered) are accounted for
  for (size_t k = 0; k < spans.size(); ++k) {
    const Span& s = spans[k];
    const int idx = static_cast<int>(k);
    const std::string where = "span " + std::to_string(k) + " (" + std::to_string(s.start) + ":" +
                              std::to_string(s.end) + ")";
    if (s.start >= s.end) return fail(SpanViolationKind::kEmptySpan, idx, -1, where + " is empty");
    if (s.start < 0 || s.end > content_length) {
      return fail(SpanViolationKind::kOutOfBounds, idx, -1,
                  where + " outside " + std::to_string(content_length) + " tokens");
    }
    if (k > 0 && s.start < spans[k - 1].start) {
      return fail(SpanViolationKind::kUnsorted, idx, -1, where + " is out of order");
    }
    if (s.start < covered) return fail(SpanViolationKind::kOverlap, idx, -1, where + " overlaps");
    if (s.start > covered) {
      return fail(SpanViolationKind::kGap, idx, covered,
                  "coverage gap at token " + std::to_string(covered));
    }
    covered = s.end;
  }
  if (covered < content_length) {
    return fail(SpanViolationKind::kGap, static_cast<int>(spans.size()), covered,
                "coverage gap at token " + std::to_string(covered));
  }
  return {};
}

ChunkSpans parse_spans(std::string_view text) {
  ChunkSpans spans;
  if (text.empty()) return spans;
  size_t at = 0;
  while (at <= text.size()) {
    size_t comma = text.find(',', at);
    std::string_view item = text.substr(at, comma == std::string_view::npos ? text.size() - at
                                                                            : comma - at);
    size_t colon = item.find(':');
    if (colon == std::string_view::npos) {
      throw SpanError("span '" + std::string(item) + "' is not of the form s:e");
    }
    spans.push_back({parse_int(item.substr(0, colon)), parse_int(item.substr(colon + 1))});
    if (comma == std::string_view::npos) break;
    at = comma + 1;
  }
  return spans;
}

std::string format_spans(const ChunkSpans& spans) {
  std::ostringstream os;
  for (size_t k = 0; k < spans.size(); ++k) {
    if (k) os << ',';
    os << spans[k].start << ':' << spans[k].end;
  }
  return os.str();
}

std::vector<int> chunk_of_token(const ChunkSpans& spans, int content_length) {
  auto report = validate_spans(spans, content_length);
  if (!report.ok) throw SpanError(report.message);
  std::vector<int> owner(static_cast<size_t>(content_length));
  for (size_t k = 0; k < spans.size(); ++k) {
    for (int i = spans[k].start; i < spans[k].end; ++i) owner[static_cast<size_t>(i)] = static_cast<int>(k);
  }
  return owner;
}

}  // namespace calec
