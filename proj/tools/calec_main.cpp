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

// calec: synthetic data, staged training, evaluation and explanations.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "calec/errors.hpp"
#include "calec/pipeline/checkpoint.hpp"
#include "calec/pipeline/config_file.hpp"
#include "calec/pipeline/dataset.hpp"
#include "calec/pipeline/evaluate.hpp"
#include "calec/pipeline/grad_check.hpp"
#include "calec/pipeline/synthetic.hpp"
#include "calec/pipeline/training.hpp"

namespace fs = std::filesystem;
using namespace calec;

namespace {

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out = "calec_out";
  bool force = false;
};

struct DecodeFlags {
  std::optional<int> beam, sample_size, top_k, max_len;
  std::optional<double> lambda;

  void add(CLI::App* app) {
    app->add_option("--beam", beam, "Beam size k");
    app->add_option("--sample-size", sample_size, "Samples per live beam (default: beam size)");
    app->add_option("--top-k", top_k, "Top-k truncation of the next-token distribution");
    app->add_option("--max-len", max_len, "Maximum generated tokens");
    app->add_option("--lambda", lambda, "Constraint coefficient in (0, 1]");
  }
  void apply(DecodeConfig& d) const {
    if (beam) d.beam_size = *beam;
    if (sample_size) d.sample_size = *sample_size;
    if (top_k) d.top_k = *top_k;
    if (max_len) d.max_length = *max_len;
    if (lambda) d.lambda = *lambda;
  }
};

RunConfig load_run_config(const Globals& g) {
  RunConfig config;
  if (!g.config_path.empty()) config.apply(ConfigFile::load(g.config_path));
  if (g.seed) config.set_seed(*g.seed);
  return config;
}

std::string in_out(const Globals& g, const std::string& name) {
  return (fs::path(g.out) / name).string();
}

// Refuses to replace an existing output unless --force was given.
void claim(const Globals& g, const std::string& path) {
  if (fs::exists(path) && !g.force) {
    throw ConfigError("'" + path + "' exists; pass --force to overwrite");
  }
  fs::create_directories(fs::path(path).parent_path());
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  return out;
}

void log_row(const TrainLogRow& r) {
  std::cerr << r.stage << " epoch " << r.epoch << " step " << r.step << " loss " << r.train_loss
            << " val " << r.val_metric << '\n';
}

ModelConfig model_config_for(const RunConfig& run, const DatasetSplits& data) {
  ModelConfig m = run.model;
  m.vocab_size = data.vocab.size();
  m.feature_dim = data.feature_dim();
  return m;
}

void check_vocabulary(const Checkpoint& c, const DatasetSplits& data) {
  if (c.vocabulary != data.vocab.words()) {
    throw CheckpointError("checkpoint vocabulary does not match the dataset");
  }
}

Checkpoint require_checkpoint(const std::string& path, Stage stage) {
  if (!fs::exists(path)) {
    throw StagingError("missing " + stage_name(stage) + " checkpoint '" + path + "'");
  }
  Checkpoint c = load_checkpoint(path);
  if (c.stage != stage) {
    throw StagingError("'" + path + "' is tagged " + stage_name(c.stage) + ", expected " +
                       stage_name(stage));
  }
  return c;
}

void save_stage(const CalecModel& model, const DatasetSplits& data, Stage stage,
                const TrainResult& result, const std::string& ckpt, const std::string& csv) {
  save_checkpoint(ckpt, Checkpoint::capture(model, data.vocab.words(), stage));
  auto out = open_out(csv);
  write_loss_csv(out, result.log);
  std::cout << stage_name(stage) << ": best validation metric " << result.best_metric
            << " at epoch " << result.best_epoch << " (initial " << result.initial_metric
            << ")\nwrote " << ckpt << " and " << csv << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Chunk-aware alignment, relation inference and constrained explanation generation"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config_path, "Config file (TOML subset)")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "Seed for data, initialization, shuffling and decoding");
  app.add_option("--out", g.out, "Output directory")->capture_default_str();
  app.add_flag("--force", g.force, "Overwrite existing outputs");

  std::string data_dir;
  auto data_option = [&](CLI::App* sub) {
    sub->add_option("--data", data_dir, "Dataset directory (default: <out>/data)");
  };
  auto resolved_data = [&] { return data_dir.empty() ? in_out(g, "data") : data_dir; };

  auto* gen = app.add_subcommand("gen-data", "Write the synthetic dataset splits");
  auto* pretrain = app.add_subcommand("pretrain-align", "Alignment pre-training of CSI");
  data_option(pretrain);
  auto* stage1 = app.add_subcommand("train-inference", "Train encoder and relation inferrer");
  data_option(stage1);
  std::string init_path;
  bool fresh = false;
  stage1->add_option("--init", init_path, "Pre-trained checkpoint (default: <out>/pretrain.ckpt)");
  stage1->add_flag("--fresh", fresh, "Start from random initialization");
  auto* stage2 = app.add_subcommand("train-generator", "Train the explanation generator");
  data_option(stage2);
  stage2->add_option("--init", init_path, "Stage-1 checkpoint (default: <out>/stage1.ckpt)");
  std::string stage2_name = "stage2";
  stage2->add_option("--name", stage2_name, "Output checkpoint stem")->capture_default_str();

  std::string ckpt_path, split = "test";
  DecodeFlags decode_flags;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Score a split with S_T, S_E and S_O");
  data_option(evaluate_cmd);
  evaluate_cmd->add_option("--checkpoint", ckpt_path, "Stage-2 checkpoint (default: <out>/stage2.ckpt)");
  evaluate_cmd->add_option("--split", split, "Split to evaluate")->capture_default_str();
  decode_flags.add(evaluate_cmd);
  std::string report_name = "eval";
  evaluate_cmd->add_option("--name", report_name, "Report file stem")->capture_default_str();

  std::string record_id;
  auto* explain = app.add_subcommand("explain", "Print prediction and explanation for one record");
  explain->add_option("record-id", record_id, "Record id")->required();
  data_option(explain);
  explain->add_option("--checkpoint", ckpt_path, "Stage-2 checkpoint (default: <out>/stage2.ckpt)");
  decode_flags.add(explain);

  auto* gradcheck = app.add_subcommand("grad-check", "Finite-difference check of the training losses");
  double tolerance = 1e-4;
  gradcheck->add_option("--tolerance", tolerance, "Maximum relative error")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    RunConfig run = load_run_config(g);

    if (*gen) {
      const std::string dir = data_dir.empty() ? in_out(g, "data") : data_dir;
      claim(g, (fs::path(dir) / "train.jsonl").string());
      DatasetSplits data = gen_synthetic(run.data);
      write_dataset(dir, data);
      std::cout << "wrote " << data.pretrain.size() << "/" << data.train.size() << "/"
                << data.val.size() << "/" << data.test.size()
                << " pretrain/train/val/test records to " << dir << '\n';
      return 0;
    }

    if (*gradcheck) {
      const auto start = std::chrono::steady_clock::now();
      GradCheckInstance instance;
      if (g.seed) instance.seed = *g.seed;
      const ModelGradCheck r = run_grad_checks(instance);
      const double seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      for (auto [name, rep] : {std::pair{"alignment", &r.alignment}, std::pair{"stage1", &r.stage1},
                               std::pair{"stage2", &r.stage2}}) {
        std::cout << name << ": max relative error " << rep->max_relative_error << " over "
                  << rep->coordinates << " coordinates (worst " << rep->worst_parameter << "["
                  << rep->worst_index << "])\n";
      }
      std::cout << "elapsed " << seconds << " s\n";
      return r.max_relative_error() < tolerance ? 0 : 1;
    }

    const DatasetSplits data = load_dataset(resolved_data());

    if (*pretrain) {
      const std::string ckpt = in_out(g, "pretrain.ckpt");
      const std::string csv = in_out(g, "pretrain_loss.csv");
      claim(g, ckpt);
      claim(g, csv);
      CalecModel model(model_config_for(run, data));
      const auto train = prepare_all(data.pretrain, data.vocab, data.lexicon);
      const auto val = prepare_all(data.val, data.vocab, data.lexicon);
      auto result = pretrain_csi(model, train, val, run.pretrain, log_row);
      save_stage(model, data, Stage::kPretrain, result, ckpt, csv);
      return 0;
    }

    if (*stage1) {
      const std::string ckpt = in_out(g, "stage1.ckpt");
      const std::string csv = in_out(g, "stage1_loss.csv");
      claim(g, ckpt);
      claim(g, csv);
      CalecModel model(model_config_for(run, data));
      if (!fresh) {
        const std::string path = init_path.empty() ? in_out(g, "pretrain.ckpt") : init_path;
        Checkpoint init = require_checkpoint(path, Stage::kPretrain);
        check_vocabulary(init, data);
        init.restore(model);
      }
      const auto train = prepare_all(data.train, data.vocab, data.lexicon);
      const auto val = prepare_all(data.val, data.vocab, data.lexicon);
      auto result = train_stage1(model, train, val, run.stage1, log_row);
      save_stage(model, data, Stage::kStage1, result, ckpt, csv);
      return 0;
    }

    if (*stage2) {
      const std::string ckpt = in_out(g, stage2_name + ".ckpt");
      const std::string csv = in_out(g, stage2_name + "_loss.csv");
      claim(g, ckpt);
      claim(g, csv);
      Checkpoint init = require_checkpoint(
          init_path.empty() ? in_out(g, "stage1.ckpt") : init_path, Stage::kStage1);
      check_vocabulary(init, data);
      ModelConfig config = init.config;
      config.lexical_mixture = run.model.lexical_mixture;
      CalecModel model(config);
      init.restore(model);
      const auto train = prepare_all(data.train, data.vocab, data.lexicon);
      const auto val = prepare_all(data.val, data.vocab, data.lexicon);
      const auto train_ex = build_generator_examples(model, train, data.vocab, true);
      const auto val_ex = build_generator_examples(model, val, data.vocab, true);
      auto result = train_stage2(model, train_ex, val_ex, run.stage2, log_row);
      save_stage(model, data, Stage::kStage2, result, ckpt, csv);
      return 0;
    }

    const std::string path = ckpt_path.empty() ? in_out(g, "stage2.ckpt") : ckpt_path;
    Checkpoint c = require_checkpoint(path, Stage::kStage2);
    check_vocabulary(c, data);
    CalecModel model(c.config);
    c.restore(model);
    DecodeConfig decode = run.decode;
    decode_flags.apply(decode);
    decode.validate(data.vocab.size());

    if (*evaluate_cmd) {
      const std::string csv = in_out(g, report_name + "_report.csv");
      const std::string jsonl = in_out(g, report_name + "_samples.jsonl");
      claim(g, csv);
      claim(g, jsonl);
      const auto records = prepare_all(data.split(split), data.vocab, data.lexicon);
      const EvalReport report = evaluate(model, records, data.vocab, decode);
      auto csv_out = open_out(csv);
      write_report_csv(csv_out, report);
      auto jsonl_out = open_out(jsonl);
      write_samples_jsonl(jsonl_out, report);
      std::cout << "S_T " << report.s_t << "  S_E " << report.s_e << "  S_O " << report.s_o
                << "  (" << report.samples.size() << " records, " << report.failed
                << " failed)\nwrote " << csv << " and " << jsonl << '\n';
      return 0;
    }

    if (*explain) {
      const DatasetRecord* record = data.find(record_id);
      if (!record) throw DataError("no record with id '" + record_id + "'");
      const PreparedRecord prepared = prepare(*record, data.vocab, data.lexicon);
      write_sample_json(std::cout, explain_record(model, prepared, data.vocab, decode));
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
