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

// Finite-difference checks of the stage-1 and stage-2 training losses on a
// small random instance.

#pragma once

#include <cstdint>

#include "calec/model/config.hpp"
#include "calec/numerics/optim.hpp"

namespace calec {

struct GradCheckInstance {
  int vocab_size = 50;
  int dim = 8;
  int content_length = 6;  // M
  int regions = 4;         // N
  int feature_dim = 6;
  int explanation_length = 4;
  std::uint64_t seed = 1;
};

struct ModelGradCheck {
  GradCheckReport alignment;  // alignment pre-training loss, embed.* and csi.*
  GradCheckReport stage1;     // relation cross-entropy, every encoder parameter
  GradCheckReport stage2;     // explanation NLL through gate and P_lex, lecg.*
  double max_relative_error() const;
};

// Model shape used by the check: every stack present, but shallow.
ModelConfig grad_check_config(const GradCheckInstance& instance);

ModelGradCheck run_grad_checks(const GradCheckInstance& instance, double epsilon = 1e-5);

}  // namespace calec
