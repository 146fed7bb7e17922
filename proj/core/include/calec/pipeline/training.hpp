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

// The three training stages and their validation metrics.

#pragma once

#include <functional>
#include <string>
#include <vector>

#include "calec/model/model.hpp"
#include "calec/numerics/optim.hpp"
#include "calec/pipeline/config_file.hpp"
#include "calec/pipeline/dataset.hpp"

namespace calec {

struct TrainLogRow {
  std::string stage;
  int epoch = 0;  // 0 is the evaluation before any update
  long step = 0;
  double train_loss = 0.0;  // mean per-record loss over the epoch
  double val_metric = 0.0;  // higher is better
};

struct TrainResult {
  std::vector<TrainLogRow> log;
  double initial_metric = 0.0;
  double best_metric = 0.0;
  int best_epoch = 0;
  bool early_stopped = false;
};

using ProgressFn = std::function<void(const TrainLogRow&)>;

void write_loss_csv(std::ostream& out, const std::vector<TrainLogRow>& rows);

// Fraction of labeled chunks whose argmax over the layer-summed alignment
// scores equals the planted candidate.
double alignment_accuracy(const CalecModel& model, const std::vector<PreparedRecord>& records);
double mean_alignment_loss(const CalecModel& model, const std::vector<PreparedRecord>& records);
double relation_accuracy(const CalecModel& model, const std::vector<PreparedRecord>& records);

// Alignment pre-training of the embeddings and CSI. Restores the parameters
// with the best validation alignment accuracy. Throws DataError if no
// training record carries an alignment label.
TrainResult pretrain_csi(CalecModel& model, const std::vector<PreparedRecord>& train,
                         const std::vector<PreparedRecord>& val, const StageOptions& options,
                         const ProgressFn& progress = {});

// Relation classification over embeddings, backbone, CSI and inferrer; the
// csi.* group uses options.csi_lr. Early-stops on validation accuracy.
TrainResult train_stage1(CalecModel& model, const std::vector<PreparedRecord>& train,
                         const std::vector<PreparedRecord>& val, const StageOptions& options,
                         const ProgressFn& progress = {});

// Frozen-encoder inputs of the generator for one record.
struct GeneratorExample {
  const PreparedRecord* record = nullptr;
  Mat ow;
  ConstraintState constraints;
  std::vector<int> position_ids;
  std::vector<int> prefix;  // BOS, input words, answer word
  std::vector<int> target;  // explanation then EOS
  int predicted = -1;
};

// Decoder prefix for a sentence and an answer.
std::vector<int> generation_prefix(const TokenSequence& seq, const Vocabulary& vocab, int answer);

// Runs the encoder once per record. The answer in the prefix is the gold
// label when `gold_answer` is set, otherwise the model's prediction.
std::vector<GeneratorExample> build_generator_examples(const CalecModel& model,
                                                       const std::vector<PreparedRecord>& records,
                                                       const Vocabulary& vocab, bool gold_answer);

// Teacher-forced perplexity: exp of the mean per-token negative log-likelihood.
double generation_perplexity(const CalecModel& model, const std::vector<GeneratorExample>& examples);

// Trains lecg.* only. Every other parameter is frozen and checked bit-wise
// unchanged afterwards (StagingError otherwise). Early-stops on validation
// perplexity.
TrainResult train_stage2(CalecModel& model, const std::vector<GeneratorExample>& train,
                         const std::vector<GeneratorExample>& val, const StageOptions& options,
                         const ProgressFn& progress = {});

}  // namespace calec
