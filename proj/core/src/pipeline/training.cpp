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

#include "calec/pipeline/training.hpp"

#include <cmath>
#include <iomanip>
#include <map>
#include <numeric>
#include <random>

#include "calec/errors.hpp"
#include "calec/numerics/ops.hpp"
#include "calec/numerics/params.hpp"

namespace calec {

namespace {

using LossFn = std::function<std::optional<Var>(size_t)>;

std::map<std::string, Mat> snapshot(const ParameterStore& store) {
  std::map<std::string, Mat> out;
  for (const auto& [name, v] : store.all()) {
    if (!store.is_frozen(name)) out.emplace(name, v.value());
  }
  return out;
}

void restore(ParameterStore& store, const std::map<std::string, Mat>& values) {
  for (const auto& [name, m] : values) {
    Var p = store.get(name);
    p.mutable_value() = m;
  }
}

std::vector<size_t> shuffled(size_t n, std::mt19937_64& rng) {
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (size_t i = n; i > 1; --i) {
    auto j = std::min(i - 1, static_cast<size_t>(unit_uniform(rng) * static_cast<double>(i)));
    std::swap(order[i - 1], order[j]);
  }
  return order;
}

// Mini-batch Adam with gradient accumulation, per-epoch validation and
// patience-based early stopping; restores the best parameters at the end.
TrainResult fit(ParameterStore& store, size_t n_train, const LossFn& loss_of,
                const std::function<double()>& validate, const StageOptions& options,
                AdamState adam, const std::string& stage, const ProgressFn& progress) {
  TrainResult result;
  const auto batches = static_cast<long>((n_train + static_cast<size_t>(options.batch_size) - 1) /
                                         static_cast<size_t>(options.batch_size));
  adam.total_steps = batches * options.epochs;
  std::mt19937_64 rng(options.seed);

  auto emit = [&](const TrainLogRow& row) {
    result.log.push_back(row);
    if (progress) progress(row);
  };
  result.initial_metric = validate();
  result.best_metric = result.initial_metric;
  emit({stage, 0, 0, std::nan(""), result.initial_metric});
  auto best = snapshot(store);
  int stale = 0;

  for (int epoch = 1; epoch <= options.epochs; ++epoch) {
    const auto order = shuffled(n_train, rng);
    double loss_sum = 0.0;
    size_t counted = 0;
    for (size_t start = 0; start < n_train; start += static_cast<size_t>(options.batch_size)) {
      const size_t end = std::min(n_train, start + static_cast<size_t>(options.batch_size));
      store.zero_grad();
      const double scale = 1.0 / static_cast<double>(end - start);
      for (size_t i = start; i < end; ++i) {
        auto loss = loss_of(order[i]);
        if (!loss) continue;
        loss_sum += loss->item();
        ++counted;
        backward(ops::affine(*loss, scale));
      }
      adam_step(store, store.gradients(), adam);
    }
    const double metric = validate();
    emit({stage, epoch, adam.step, counted ? loss_sum / static_cast<double>(counted) : std::nan(""),
          metric});
    if (metric > result.best_metric) {
      result.best_metric = metric;
      result.best_epoch = epoch;
      best = snapshot(store);
      stale = 0;
    } else if (++stale >= options.patience) {
      result.early_stopped = true;
      break;
    }
  }
  store.zero_grad();
  restore(store, best);
  return result;
}

std::vector<int> argmax_rows(const Mat& m) {
  std::vector<int> out(static_cast<size_t>(m.rows()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < m.cols(); ++c) {
      if (m(r, c) > m(r, best)) best = c;
    }
    out[static_cast<size_t>(r)] = static_cast<int>(best);
  }
  return out;
}

const char* kEncoderPrefixes[] = {kEmbedPrefix, kBackbonePrefix, kCsiPrefix, kInferrerPrefix};

}  // namespace

void write_loss_csv(std::ostream& out, const std::vector<TrainLogRow>& rows) {
  out << "stage,epoch,step,train_loss,val_metric\n";
  out << std::setprecision(17);
  for (const auto& r : rows) {
    out << r.stage << ',' << r.epoch << ',' << r.step << ',';
    if (!std::isnan(r.train_loss)) out << r.train_loss;
    out << ',' << r.val_metric << '\n';
  }
}

double alignment_accuracy(const CalecModel& model, const std::vector<PreparedRecord>& records) {
  NoGradGuard no_grad;
  long hit = 0;
  long total = 0;
  for (const auto& r : records) {
    if (!r.align.any_labeled()) continue;
    const auto out = model.encode_csi(r.seq, r.spans, r.regions);
    const auto best = argmax_rows(summed_alignment_scores(out.modal_scores));
    for (size_t k = 0; k < best.size(); ++k) {
      if (r.align.targets[k] < 0) continue;
      ++total;
      hit += best[k] == r.align.targets[k];
    }
  }
  return total ? static_cast<double>(hit) / static_cast<double>(total) : 0.0;
}

double mean_alignment_loss(const CalecModel& model, const std::vector<PreparedRecord>& records) {
  NoGradGuard no_grad;
  double sum = 0.0;
  long n = 0;
  for (const auto& r : records) {
    if (!r.align.any_labeled()) continue;
    sum += alignment_loss(model.encode_csi(r.seq, r.spans, r.regions).modal_scores, r.align).item();
    ++n;
  }
  return n ? sum / static_cast<double>(n) : 0.0;
}

double relation_accuracy(const CalecModel& model, const std::vector<PreparedRecord>& records) {
  if (records.empty()) return 0.0;
  NoGradGuard no_grad;
  long hit = 0;
  for (const auto& r : records) {
    const auto e = model.encode(r.seq, r.spans, r.regions);
    hit += classify_logits(e.fused.logits.value()).predicted == r.label;
  }
  return static_cast<double>(hit) / static_cast<double>(records.size());
}

TrainResult pretrain_csi(CalecModel& model, const std::vector<PreparedRecord>& train,
                         const std::vector<PreparedRecord>& val, const StageOptions& options,
                         const ProgressFn& progress) {
  options.validate("pretrain");
  std::vector<const PreparedRecord*> labeled;
  for (const auto& r : train) {
    if (r.align.any_labeled()) labeled.push_back(&r);
  }
  if (labeled.empty()) throw DataError("alignment pre-training needs alignment labels");

  ParameterStore& store = model.params();
  store.unfreeze_all();
  for (const char* p : {kBackbonePrefix, kInferrerPrefix, kGeneratorPrefix}) store.freeze_prefix(p);
  AdamState adam;
  adam.base_lr = options.lr;
  adam.group_lr = {{kCsiPrefix, options.csi_lr}};
  auto loss_of = [&](size_t i) -> std::optional<Var> {
    const PreparedRecord& r = *labeled[i];
    return alignment_loss(model.encode_csi(r.seq, r.spans, r.regions).modal_scores, r.align);
  };
  auto validate = [&] { return alignment_accuracy(model, val); };
  auto result = fit(store, labeled.size(), loss_of, validate, options, adam, "pretrain", progress);
  store.unfreeze_all();
  return result;
}

TrainResult train_stage1(CalecModel& model, const std::vector<PreparedRecord>& train,
                         const std::vector<PreparedRecord>& val, const StageOptions& options,
                         const ProgressFn& progress) {
  options.validate("stage1");
  if (train.empty()) throw DataError("stage 1 needs training records");
  ParameterStore& store = model.params();
  store.unfreeze_all();
  store.freeze_prefix(kGeneratorPrefix);
  AdamState adam;
  adam.base_lr = options.lr;
  adam.group_lr = {{kCsiPrefix, options.csi_lr}};
  auto loss_of = [&](size_t i) -> std::optional<Var> {
    const PreparedRecord& r = train[i];
    return inference_loss(model.encode(r.seq, r.spans, r.regions).fused.logits, r.label);
  };
  auto validate = [&] { return relation_accuracy(model, val); };
  auto result = fit(store, train.size(), loss_of, validate, options, adam, "stage1", progress);
  store.unfreeze_all();
  return result;
}

std::vector<int> generation_prefix(const TokenSequence& seq, const Vocabulary& vocab, int answer) {
  std::vector<int> prefix{Vocabulary::kBos};
  for (int i = 0; i < seq.content_length(); ++i) prefix.push_back(seq.content_id(i));
  prefix.push_back(vocab.id(relation_name(answer)));
  return prefix;
}

std::vector<GeneratorExample> build_generator_examples(const CalecModel& model,
                                                       const std::vector<PreparedRecord>& records,
                                                       const Vocabulary& vocab, bool gold_answer) {
  NoGradGuard no_grad;
  std::vector<GeneratorExample> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    const auto e = model.encode(r.seq, r.spans, r.regions);
    GeneratorExample g;
    g.record = &r;
    g.ow = e.fused.ow.value();
    const auto saliency = token_saliency(e.fused.alphas, r.seq.content_length());
    g.constraints = build_constraint_set(saliency, r.seq);
    g.position_ids = ow_position_ids(r.seq);
    g.predicted = classify_logits(e.fused.logits.value()).predicted;
    g.prefix = generation_prefix(r.seq, vocab, gold_answer ? r.label : g.predicted);
    g.target = r.explanation;
    g.target.push_back(Vocabulary::kEos);
    out.push_back(std::move(g));
  }
  return out;
}

double generation_perplexity(const CalecModel& model, const std::vector<GeneratorExample>& examples) {
  NoGradGuard no_grad;
  double nll = 0.0;
  long tokens = 0;
  for (const auto& g : examples) {
    nll += model.generator()
               .generation_loss(g.prefix, g.target, Var(g.ow), g.constraints, g.position_ids)
               .item();
    tokens += static_cast<long>(g.target.size());
  }
  return tokens ? std::exp(nll / static_cast<double>(tokens)) : 1.0;
}

TrainResult train_stage2(CalecModel& model, const std::vector<GeneratorExample>& train,
                         const std::vector<GeneratorExample>& val, const StageOptions& options,
                         const ProgressFn& progress) {
  options.validate("stage2");
  if (train.empty()) throw DataError("stage 2 needs training records");
  ParameterStore& store = model.params();
  store.unfreeze_all();
  std::vector<std::uint64_t> before;
  for (const char* p : kEncoderPrefixes) {
    store.freeze_prefix(p);
    before.push_back(store.fingerprint(p));
  }
  AdamState adam;
  adam.base_lr = options.lr;
  auto loss_of = [&](size_t i) -> std::optional<Var> {
    const GeneratorExample& g = train[i];
    return model.generator().generation_loss(g.prefix, g.target, Var(g.ow), g.constraints,
                                             g.position_ids);
  };
  auto validate = [&] { return -generation_perplexity(model, val); };
  auto result = fit(store, train.size(), loss_of, validate, options, adam, "stage2", progress);
  for (size_t i = 0; i < before.size(); ++i) {
    if (store.fingerprint(kEncoderPrefixes[i]) != before[i]) {
      throw StagingError(std::string("frozen group ") + kEncoderPrefixes[i] + " changed in stage 2");
    }
  }
  store.unfreeze_all();
  return result;
}

}  // namespace calec
