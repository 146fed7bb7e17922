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

#include "calec/pipeline/dataset.hpp"

#include <filesystem>
#include <map>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "calec/errors.hpp"

namespace calec {

using nlohmann::json;

namespace {

constexpr std::string_view kRelationNames[] = {"entailment", "contradiction", "neutral"};

}  // namespace

std::string_view relation_name(int label) {
  if (label < 0 || label >= kNumRelations) throw DataError("relation label out of range");
  return kRelationNames[label];
}

int parse_relation(std::string_view name) {
  for (int i = 0; i < kNumRelations; ++i) {
    if (kRelationNames[i] == name) return i;
  }
  throw DataError("unknown relation '" + std::string(name) + "'");
}

void DatasetRecord::validate(int num_relations) const {
  auto fail = [&](const std::string& what) { throw DataError("record " + id + ": " + what); };
  if (id.empty()) throw DataError("record without an id");
  if (words.empty()) fail("empty sentence");
  if (regions.rows() < 2 || regions.cols() < 1) fail("need a global feature and >= 1 region");
  if (!regions.allFinite()) fail("non-finite region feature");
  if (label < 0 || label >= num_relations) fail("label out of range");
  if (spans) {
    SpanReport r = validate_spans(*spans, static_cast<int>(words.size()));
    if (!r.ok) throw SpanError("record " + id + ": " + r.message);
  }
  if (align) {
    if (!spans) fail("alignment labels without spans");
    if (align->size() != spans->size()) fail("one alignment label per chunk is required");
    for (int a : *align) {
      if (a < -1 || a >= regions.rows()) fail("alignment label out of range");
    }
  }
}

void write_record(std::ostream& out, const DatasetRecord& r) {
  json j;
  j["id"] = r.id;
  j["image_id"] = r.image_id;
  j["words"] = r.words;
  if (r.spans) j["spans"] = format_spans(*r.spans);
  json regions = json::array();
  for (Eigen::Index i = 0; i < r.regions.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < r.regions.cols(); ++k) row.push_back(r.regions(i, k));
    regions.push_back(std::move(row));
  }
  j["regions"] = std::move(regions);
  if (r.align) j["align"] = *r.align;
  j["label"] = std::string(relation_name(r.label));
  j["explanation"] = r.explanation;
  out << j.dump() << '\n';
}

DatasetRecord parse_record(const std::string& line) {
  DatasetRecord r;
  try {
    json j = json::parse(line);
    r.id = j.at("id").get<std::string>();
    r.image_id = j.value("image_id", r.id);
    r.words = j.at("words").get<std::vector<std::string>>();
    if (j.contains("spans")) r.spans = parse_spans(j["spans"].get<std::string>());
    const auto rows = j.at("regions").get<std::vector<std::vector<double>>>();
    if (rows.empty()) throw DataError("record " + r.id + ": no region features");
    r.regions.resize(static_cast<Eigen::Index>(rows.size()),
                     static_cast<Eigen::Index>(rows.front().size()));
    for (size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != rows.front().size()) {
        throw DataError("record " + r.id + ": ragged region features");
      }
      for (size_t k = 0; k < rows[i].size(); ++k) {
        r.regions(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
      }
    }
    if (j.contains("align")) r.align = j["align"].get<std::vector<int>>();
    const json& label = j.at("label");
    r.label = label.is_number_integer() ? label.get<int>()
                                        : parse_relation(label.get<std::string>());
    if (j.contains("explanation")) r.explanation = j["explanation"].get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed record: ") + e.what());
  }
  r.validate();
  return r;
}

std::vector<DatasetRecord> read_records(std::istream& in, const std::string& source) {
  std::vector<DatasetRecord> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(parse_record(line));
    } catch (const Error& e) {
      throw DataError(source + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

void write_records(std::ostream& out, const std::vector<DatasetRecord>& records) {
  for (const auto& r : records) write_record(out, r);
}

const std::vector<DatasetRecord>& DatasetSplits::split(std::string_view name) const {
  if (name == "pretrain") return pretrain;
  if (name == "train") return train;
  if (name == "val") return val;
  if (name == "test") return test;
  throw DataError("unknown split '" + std::string(name) + "'");
}

int DatasetSplits::feature_dim() const {
  for (auto name : kSplitNames) {
    const auto& s = split(name);
    if (!s.empty()) return static_cast<int>(s.front().regions.cols());
  }
  throw DataError("dataset is empty");
}

const DatasetRecord* DatasetSplits::find(const std::string& id) const {
  for (auto name : kSplitNames) {
    for (const auto& r : split(name)) {
      if (r.id == id) return &r;
    }
  }
  return nullptr;
}

void check_split_disjoint(const DatasetSplits& splits) {
  std::map<std::string, std::string> owner;
  for (auto name : kSplitNames) {
    std::set<std::string> seen;
    for (const auto& r : splits.split(name)) seen.insert(r.image_id);
    for (const auto& image : seen) {
      auto [it, inserted] = owner.emplace(image, name);
      if (!inserted) {
        throw DataError("image '" + image + "' appears in both " + it->second + " and " + name);
      }
    }
  }
}

void write_dataset(const std::string& dir, const DatasetSplits& splits) {
  std::filesystem::create_directories(dir);
  auto open = [&](const std::string& file) {
    std::ofstream out(std::filesystem::path(dir) / file);
    if (!out) throw DataError("cannot write " + (std::filesystem::path(dir) / file).string());
    return out;
  };
  for (auto name : kSplitNames) {
    auto out = open(std::string(name) + ".jsonl");
    write_records(out, splits.split(name));
  }
  auto vocab = open("vocab.txt");
  for (const auto& w : splits.vocab.words()) vocab << w << '\n';
  auto lexicon = open("lexicon.tsv");
  splits.lexicon.write(lexicon);
}

DatasetSplits load_dataset(const std::string& dir) {
  auto open = [&](const std::string& file) {
    const auto path = std::filesystem::path(dir) / file;
    std::ifstream in(path);
    if (!in) throw DataError("cannot read " + path.string());
    return in;
  };
  DatasetSplits s;
  {
    auto in = open("vocab.txt");
    std::vector<std::string> words;
    std::string w;
    while (std::getline(in, w)) {
      if (!w.empty()) words.push_back(w);
    }
    s.vocab = Vocabulary(words);
  }
  {
    auto in = open("lexicon.tsv");
    s.lexicon = Lexicon::read(in);
  }
  for (auto name : kSplitNames) {
    auto in = open(std::string(name) + ".jsonl");
    auto records = read_records(in, std::string(name) + ".jsonl");
    if (std::string_view(name) == "pretrain") s.pretrain = std::move(records);
    if (std::string_view(name) == "train") s.train = std::move(records);
    if (std::string_view(name) == "val") s.val = std::move(records);
    if (std::string_view(name) == "test") s.test = std::move(records);
  }
  check_split_disjoint(s);
  return s;
}

PreparedRecord prepare(const DatasetRecord& record, const Vocabulary& vocab,
                       const Lexicon& lexicon) {
  PreparedRecord p;
  p.source = &record;
  p.seq = TokenSequence::from_words(record.words, vocab);
  p.spans = record.spans ? *record.spans : rule_chunk(record.words, lexicon);
  p.regions.features = record.regions;
  if (record.align) {
    p.align.targets = *record.align;
  } else {
    p.align.targets.assign(p.spans.size(), -1);
  }
  p.label = record.label;
  p.explanation = vocab.encode(record.explanation);
  return p;
}

std::vector<PreparedRecord> prepare_all(const std::vector<DatasetRecord>& records,
                                        const Vocabulary& vocab, const Lexicon& lexicon) {
  std::vector<PreparedRecord> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(prepare(r, vocab, lexicon));
  return out;
}

}  // namespace calec
