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

// Versioned checkpoint container.
//
// Layout: the 8-byte magic "CALECKPT", a little-endian u32 format version,
// a u64 manifest length, the JSON manifest (config, vocabulary, stage tag and
// one {name, shape, offset} entry per array), then the raw little-endian f64
// payload. Offsets count doubles from the start of the payload.

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "calec/model/config.hpp"
#include "calec/model/model.hpp"
#include "calec/numerics/tensor.hpp"

namespace calec {

inline constexpr std::uint32_t kCheckpointVersion = 1;

enum class Stage { kInit, kPretrain, kStage1, kStage2 };
std::string stage_name(Stage stage);
Stage parse_stage(const std::string& name);  // throws CheckpointError

struct Checkpoint {
  ModelConfig config;
  std::vector<std::string> vocabulary;  // non-marker words in id order
  Stage stage = Stage::kInit;
  std::map<std::string, Mat> arrays;    // parameters, plus "adam.m/..." and "adam.v/..." if saved
  long optimizer_step = 0;

  static Checkpoint capture(const CalecModel& model, const std::vector<std::string>& vocabulary,
                            Stage stage);
  // Copies every parameter into `model`. Throws CheckpointError on a missing
  // name or shape mismatch.
  void restore(CalecModel& model) const;
};

void save_checkpoint(const std::string& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace calec
