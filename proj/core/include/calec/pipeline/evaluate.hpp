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

// Inference plus constrained decoding over a split, scored with S_T, S_E
// (mean BLEU-4 over correctly classified records) and S_O = S_T * S_E.

#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "calec/decoding/beam.hpp"
#include "calec/model/model.hpp"
#include "calec/pipeline/dataset.hpp"

namespace calec {

struct SampleResult {
  std::string id;
  int gold = -1;
  int predicted = -1;
  bool correct = false;
  bool failed = false;
  std::string error;
  std::vector<std::string> explanation;  // decoded, markers stripped
  std::vector<std::string> reference;
  double bleu = 0.0;
  std::vector<std::string> constraint_words;
  int constraint_hits = 0;  // decoded tokens that are in S
  std::vector<double> saliency;
  Mat chunk_region;  // K x (N+1), cross-modal weights averaged over layers
};

struct EvalReport {
  double s_t = 0.0;
  double s_e = 0.0;
  double s_o = 0.0;
  double mean_constraint_hits = 0.0;
  long failed = 0;
  std::vector<SampleResult> samples;
};

// Fills the aggregate fields from `samples`. A failed sample counts as
// incorrect.
EvalReport score_samples(std::vector<SampleResult> samples);

// Classification and decoding for one record; errors propagate.
SampleResult explain_record(const CalecModel& model, const PreparedRecord& record,
                            const Vocabulary& vocab, const DecodeConfig& decode);

// Per-record RNG streams come from (decode.seed, record id). A record whose
// decode throws is kept as a failed row.
EvalReport evaluate(const CalecModel& model, const std::vector<PreparedRecord>& records,
                    const Vocabulary& vocab, const DecodeConfig& decode);

void write_report_csv(std::ostream& out, const EvalReport& report);
void write_sample_json(std::ostream& out, const SampleResult& sample);
void write_samples_jsonl(std::ostream& out, const EvalReport& report);

}  // namespace calec
