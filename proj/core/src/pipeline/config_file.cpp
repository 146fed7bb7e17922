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

#include "calec/pipeline/config_file.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <functional>

#include "calec/errors.hpp"

namespace calec {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Strips a trailing comment that is not inside a quoted string.
std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

bool valid_key(const std::string& key) {
  if (key.empty()) return false;
  for (char c : key) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) return false;
  }
  return true;
}

long long to_int(const std::string& key, const std::string& v) {
  long long out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError(key + ": expected an integer, got '" + v + "'");
  }
  return out;
}

double to_real(const std::string& key, const std::string& v) {
  try {
    size_t used = 0;
    double out = std::stod(v, &used);
    if (used == v.size()) return out;
  } catch (const std::exception&) {
  }
  throw ConfigError(key + ": expected a number, got '" + v + "'");
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

int to_count(const std::string& key, const std::string& v) {
  long long n = to_int(key, v);
  if (n < 0 || n > (1LL << 30)) throw ConfigError(key + ": out of range");
  return static_cast<int>(n);
}

}  // namespace

ConfigFile ConfigFile::parse(std::istream& in, const std::string& source) {
  ConfigFile file;
  std::string section;
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& what) {
    throw ConfigError(source + ":" + std::to_string(lineno) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(strip_comment(line));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail("unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!valid_key(section)) fail("bad section name '" + section + "'");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected key = value");
    const std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (!valid_key(key)) fail("bad key '" + key + "'");
    if (value.empty()) fail("missing value for '" + key + "'");
    if (value.front() == '"') {
      if (value.size() < 2 || value.back() != '"') fail("unterminated string");
      value = value.substr(1, value.size() - 2);
    }
    const std::string full = section.empty() ? key : section + "." + key;
    if (!file.entries_.emplace(full, value).second) fail("duplicate key '" + full + "'");
  }
  return file;
}

ConfigFile ConfigFile::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse(in, path);
}

std::optional<std::string> ConfigFile::raw(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void SyntheticConfig::validate() const {
  if (pretrain_size < 1 || train_size < 1 || val_size < 1 || test_size < 1) {
    throw ConfigError("data sizes must be >= 1");
  }
  if (regions < 2) throw ConfigError("data.regions must be >= 2");
  if (feature_dim < 1) throw ConfigError("data.feature_dim must be >= 1");
  if (!(noise >= 0.0)) throw ConfigError("data.noise must be >= 0");
  if (!(two_phrase_prob >= 0.0 && two_phrase_prob <= 1.0)) {
    throw ConfigError("data.two_phrase_prob must lie in [0, 1]");
  }
  if (!(color_scale > 0.0)) throw ConfigError("data.color_scale must be positive");
  if (!(hard_negative_prob >= 0.0 && hard_negative_prob <= 1.0)) {
    throw ConfigError("data.hard_negative_prob must lie in [0, 1]");
  }
}

void StageOptions::validate(const std::string& stage) const {
  if (epochs < 0) throw ConfigError(stage + ".epochs must be >= 0");
  if (batch_size < 1) throw ConfigError(stage + ".batch_size must be >= 1");
  if (!(lr >= 0.0) || !(csi_lr >= 0.0)) throw ConfigError(stage + ": learning rates must be >= 0");
  if (patience < 1) throw ConfigError(stage + ".patience must be >= 1");
}

RunConfig::RunConfig() { stage1.csi_lr = 1e-6; }

void RunConfig::set_seed(std::uint64_t seed) {
  model.seed = seed;
  data.seed = seed;
  pretrain.seed = seed;
  stage1.seed = seed;
  stage2.seed = seed;
  decode.seed = seed;
}

void RunConfig::apply(const ConfigFile& file) {
  using Setter = std::function<void(const std::string&, const std::string&)>;
  std::map<std::string, Setter> setters;
  auto count = [&](const std::string& key, int* field) {
    setters[key] = [field](const std::string& k, const std::string& v) { *field = to_count(k, v); };
  };
  auto real = [&](const std::string& key, double* field) {
    setters[key] = [field](const std::string& k, const std::string& v) { *field = to_real(k, v); };
  };
  auto flag = [&](const std::string& key, bool* field) {
    setters[key] = [field](const std::string& k, const std::string& v) { *field = to_bool(k, v); };
  };

  count("model.dim", &model.dim);
  count("model.heads", &model.heads);
  count("model.ffn_mult", &model.ffn_mult);
  count("model.max_text_positions", &model.max_text_positions);
  count("model.max_decoder_positions", &model.max_decoder_positions);
  count("model.backbone_layers", &model.backbone_layers);
  count("model.within_chunk_layers", &model.within_chunk_layers);
  count("model.cross_chunk_layers", &model.cross_chunk_layers);
  count("model.cross_modal_layers", &model.cross_modal_layers);
  count("model.inferrer_layers", &model.inferrer_layers);
  count("model.decoder_layers", &model.decoder_layers);
  flag("model.inferrer_shared", &model.inferrer_shared);
  flag("model.lexical_mixture", &model.lexical_mixture);
  flag("model.bias", &model.bias);
  flag("model.final_norm", &model.final_norm);
  real("model.dropout", &model.dropout);

  count("data.pretrain_size", &data.pretrain_size);
  count("data.train_size", &data.train_size);
  count("data.val_size", &data.val_size);
  count("data.test_size", &data.test_size);
  count("data.regions", &data.regions);
  count("data.feature_dim", &data.feature_dim);
  real("data.noise", &data.noise);
  real("data.two_phrase_prob", &data.two_phrase_prob);
  real("data.color_scale", &data.color_scale);
  real("data.hard_negative_prob", &data.hard_negative_prob);

  for (auto [name, stage] : {std::pair{"pretrain", &pretrain}, std::pair{"stage1", &stage1},
                             std::pair{"stage2", &stage2}}) {
    const std::string s = name;
    count(s + ".epochs", &stage->epochs);
    count(s + ".batch_size", &stage->batch_size);
    count(s + ".patience", &stage->patience);
    real(s + ".lr", &stage->lr);
    real(s + ".csi_lr", &stage->csi_lr);
  }

  count("decode.beam", &decode.beam_size);
  count("decode.sample_size", &decode.sample_size);
  count("decode.top_k", &decode.top_k);
  count("decode.max_len", &decode.max_length);
  real("decode.lambda", &decode.lambda);

  setters["seed"] = [this](const std::string& k, const std::string& v) {
    long long s = to_int(k, v);
    if (s < 0) throw ConfigError("seed must be >= 0");
    set_seed(static_cast<std::uint64_t>(s));
  };

  // The seed goes first so per-section values are not overwritten by it.
  if (auto s = file.raw("seed")) setters["seed"]("seed", *s);
  for (const auto& [key, value] : file.entries()) {
    if (key == "seed") continue;
    auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError("unknown config key '" + key + "'");
    it->second(key, value);
  }
  data.validate();
  pretrain.validate("pretrain");
  stage1.validate("stage1");
  stage2.validate("stage2");
  decode.validate();
}

}  // namespace calec
