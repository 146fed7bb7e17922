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

#include "calec/pipeline/evaluate.hpp"

#include <iomanip>

#include <json.hpp>

#include "calec/errors.hpp"
#include "calec/pipeline/bleu.hpp"
#include "calec/pipeline/training.hpp"

namespace calec {

using nlohmann::json;

EvalReport score_samples(std::vector<SampleResult> samples) {
  EvalReport report;
  long correct = 0;
  double bleu_sum = 0.0;
  double hits = 0.0;
  for (auto& s : samples) {
    if (s.failed) {
      s.correct = false;
      ++report.failed;
    }
    if (s.correct) {
      ++correct;
      bleu_sum += s.bleu;
    }
    hits += s.constraint_hits;
  }
  if (!samples.empty()) {
    report.s_t = static_cast<double>(correct) / static_cast<double>(samples.size());
    report.mean_constraint_hits = hits / static_cast<double>(samples.size());
  }
  report.s_e = correct ? bleu_sum / static_cast<double>(correct) : 0.0;
  report.s_o = report.s_t * report.s_e;
  report.samples = std::move(samples);
  return report;
}

SampleResult explain_record(const CalecModel& model, const PreparedRecord& record,
                            const Vocabulary& vocab, const DecodeConfig& decode) {
  NoGradGuard no_grad;
  SampleResult s;
  s.id = record.source ? record.source->id : "";
  s.gold = record.label;
  s.reference = vocab.decode(record.explanation);

  const EncodedInput e = model.encode(record.seq, record.spans, record.regions);
  s.predicted = classify_logits(e.fused.logits.value()).predicted;
  s.correct = s.predicted == s.gold;
  s.saliency = token_saliency(e.fused.alphas, record.seq.content_length());
  const ConstraintState constraints = build_constraint_set(s.saliency, record.seq);
  for (int id : constraints.ids) s.constraint_words.push_back(vocab.word(id));
  if (!e.csi.modal_weights.empty()) {
    s.chunk_region = Mat::Zero(e.csi.modal_weights.front().rows(), e.csi.modal_weights.front().cols());
    for (const Var& w : e.csi.modal_weights) s.chunk_region += w.value();
    s.chunk_region /= static_cast<double>(e.csi.modal_weights.size());
  }

  const Var ow(e.fused.ow.value());
  const std::vector<int> positions = ow_position_ids(record.seq);
  const std::vector<int> prefix = generation_prefix(record.seq, vocab, s.predicted);
  StepFn step = [&](std::span<const int> sent) {
    return model.generator().step(sent, ow, constraints, positions).p;
  };
  DecodeConfig config = decode;
  config.seed = record_seed(decode.seed, s.id);
  const DecodeResult result = constrained_beam_sample(step, prefix, constraints, config,
                                                      Vocabulary::kEos);
  std::vector<int> generated(result.sentence.begin() + static_cast<long>(prefix.size()),
                             result.sentence.end());
  if (!generated.empty() && generated.back() == Vocabulary::kEos) generated.pop_back();
  for (int id : generated) {
    if (constraints.contains(id)) ++s.constraint_hits;
    if (!vocab.is_special(id)) s.explanation.push_back(vocab.word(id));
  }
  s.bleu = s.reference.empty() ? 0.0 : bleu4(s.explanation, {s.reference});
  return s;
}

EvalReport evaluate(const CalecModel& model, const std::vector<PreparedRecord>& records,
                    const Vocabulary& vocab, const DecodeConfig& decode) {
  decode.validate(vocab.size());
  std::vector<SampleResult> samples;
  samples.reserve(records.size());
  for (const auto& r : records) {
    try {
      samples.push_back(explain_record(model, r, vocab, decode));
    } catch (const std::exception& ex) {
      SampleResult s;
      s.id = r.source ? r.source->id : "";
      s.gold = r.label;
      s.failed = true;
      s.error = ex.what();
      samples.push_back(std::move(s));
    }
  }
  return score_samples(std::move(samples));
}

void write_report_csv(std::ostream& out, const EvalReport& report) {
  out << std::setprecision(17);
  out << "metric,value\n";
  out << "S_T," << report.s_t << '\n';
  out << "S_E," << report.s_e << '\n';
  out << "S_O," << report.s_o << '\n';
  out << "records," << report.samples.size() << '\n';
  out << "failed," << report.failed << '\n';
  out << "mean_constraint_hits," << report.mean_constraint_hits << '\n';
}

void write_sample_json(std::ostream& out, const SampleResult& s) {
  json j;
  j["id"] = s.id;
  j["gold"] = s.gold >= 0 ? std::string(relation_name(s.gold)) : "";
  j["predicted"] = s.predicted >= 0 ? std::string(relation_name(s.predicted)) : "";
  j["correct"] = s.correct;
  j["failed"] = s.failed;
  if (s.failed) j["error"] = s.error;
  j["explanation"] = s.explanation;
  j["reference"] = s.reference;
  j["bleu4"] = s.bleu;
  j["constraint_set"] = s.constraint_words;
  j["constraint_hits"] = s.constraint_hits;
  j["saliency"] = s.saliency;
  json matrix = json::array();
  for (Eigen::Index r = 0; r < s.chunk_region.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < s.chunk_region.cols(); ++c) row.push_back(s.chunk_region(r, c));
    matrix.push_back(std::move(row));
  }
  j["chunk_region"] = std::move(matrix);
  out << j.dump() << '\n';
}

void write_samples_jsonl(std::ostream& out, const EvalReport& report) {
  for (const auto& s : report.samples) write_sample_json(out, s);
}

}  // namespace calec
