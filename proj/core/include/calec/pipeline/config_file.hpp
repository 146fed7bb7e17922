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

// Run configuration: a small TOML subset plus the typed settings it fills.
//
// Accepted syntax: `[section]` headers, `key = value` lines, `#` comments.
// Values are integers, reals, `true`/`false`, or double-quoted strings.

#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "calec/decoding/beam.hpp"
#include "calec/model/config.hpp"

namespace calec {

class ConfigFile {
 public:
  // Throws ConfigError with the source name and line on malformed input.
  static ConfigFile parse(std::istream& in, const std::string& source = "<config>");
  static ConfigFile load(const std::string& path);

  // Keys are "section.key"; top-level keys have no dot.
  std::optional<std::string> raw(const std::string& key) const;
  const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
};

struct SyntheticConfig {
  int pretrain_size = 2000;
  int train_size = 2000;
  int val_size = 300;
  int test_size = 300;
  int regions = 4;  // N, excluding the global feature
  int feature_dim = 32;
  double noise = 0.1;            // per-feature noise, relative to prototype scale
  double two_phrase_prob = 0.5;  // chance of a prepositional second noun phrase
  double color_scale = 0.7;      // colour prototype scale relative to nouns
  // Chance that a planted region gets a sibling with the same noun and another
  // colour, so only the colour tells the two apart.
  double hard_negative_prob = 0.0;
  std::uint64_t seed = 1234;

  void validate() const;
};

struct StageOptions {
  int epochs = 50;
  int batch_size = 16;
  double lr = 1e-5;
  double csi_lr = 1e-5;  // learning rate of the csi.* group
  int patience = 5;
  std::uint64_t seed = 1234;

  void validate(const std::string& stage) const;
};

struct RunConfig {
  ModelConfig model;
  SyntheticConfig data;
  StageOptions pretrain;
  StageOptions stage1;
  StageOptions stage2;
  DecodeConfig decode;

  RunConfig();
  // Applies every entry; unknown keys and bad values throw ConfigError.
  void apply(const ConfigFile& file);
  // Propagates one seed to every component.
  void set_seed(std::uint64_t seed);
};

}  // namespace calec
