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

// Dataset records, JSON-lines IO and split loading.

#pragma once

#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "calec/model/csi.hpp"
#include "calec/model/encoder.hpp"
#include "calec/numerics/tensor.hpp"
#include "calec/text/chunker.hpp"
#include "calec/text/vocabulary.hpp"

namespace calec {

enum class Relation { kEntailment = 0, kContradiction = 1, kNeutral = 2 };
inline constexpr int kNumRelations = 3;

std::string_view relation_name(int label);
int parse_relation(std::string_view name);  // throws DataError

struct DatasetRecord {
  std::string id;
  std::string image_id;
  std::vector<std::string> words;
  std::optional<ChunkSpans> spans;
  Mat regions;  // (N+1) x f, row 0 global
  std::optional<std::vector<int>> align;  // per chunk: candidate index or -1
  int label = -1;
  std::vector<std::string> explanation;

  // Throws DataError / SpanError when fields disagree.
  void validate(int num_relations = kNumRelations) const;
};

// One record per line. Doubles are written in shortest round-trip form.
void write_record(std::ostream& out, const DatasetRecord& record);
DatasetRecord parse_record(const std::string& line);
std::vector<DatasetRecord> read_records(std::istream& in, const std::string& source = "<records>");
void write_records(std::ostream& out, const std::vector<DatasetRecord>& records);

inline constexpr const char* kSplitNames[] = {"pretrain", "train", "val", "test"};

struct DatasetSplits {
  std::vector<DatasetRecord> pretrain, train, val, test;
  Vocabulary vocab;
  Lexicon lexicon;

  const std::vector<DatasetRecord>& split(std::string_view name) const;
  int feature_dim() const;
  const DatasetRecord* find(const std::string& id) const;
};

// Throws DataError if any image id appears in two splits.
void check_split_disjoint(const DatasetSplits& splits);

// Directory layout: <split>.jsonl, vocab.txt (one word per line, markers
// excluded) and lexicon.tsv.
void write_dataset(const std::string& dir, const DatasetSplits& splits);
DatasetSplits load_dataset(const std::string& dir);

// A record resolved against the vocabulary and lexicon, ready for the model.
struct PreparedRecord {
  const DatasetRecord* source = nullptr;
  TokenSequence seq;
  ChunkSpans spans;
  RegionSet regions;
  AlignmentLabels align;
  int label = -1;
  std::vector<int> explanation;  // vocabulary ids, EOS excluded
};

PreparedRecord prepare(const DatasetRecord& record, const Vocabulary& vocab,
                       const Lexicon& lexicon);
std::vector<PreparedRecord> prepare_all(const std::vector<DatasetRecord>& records,
                                        const Vocabulary& vocab, const Lexicon& lexicon);

}  // namespace calec
