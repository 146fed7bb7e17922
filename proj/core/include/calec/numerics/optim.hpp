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

#pragma once

#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "calec/numerics/params.hpp"

namespace calec {

struct AdamState {
  double base_lr = 1e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  // Parameters whose name starts with a listed prefix use that learning rate.
  // The longest matching prefix wins.
  std::vector<std::pair<std::string, double>> group_lr;
  // Linear decay to zero over this many steps; 0 keeps the rate constant.
  long total_steps = 0;
  long step = 0;
  std::map<std::string, Mat> first_moment;
  std::map<std::string, Mat> second_moment;

  double learning_rate_for(const std::string& name) const;
  // Multiplier applied at the upcoming step.
  double decay_factor() const;
};

// One bias-corrected Adam update of every non-frozen parameter in `grads`.
// Frozen parameters are untouched even if a gradient is supplied.
void adam_step(ParameterStore& store, const GradientMap& grads, AdamState& state);

struct GradCheckReport {
  double max_relative_error = 0.0;
  double max_absolute_error = 0.0;  // max |a - n|
  // Same ratio with the denominator floored at 1e-5 instead of 1e-8, which
  // sits above the roundoff of central differences on O(10) losses.
  double max_floored_error = 0.0;
  std::string worst_parameter;
  Eigen::Index worst_index = -1;
  double analytic = 0.0;
  double numeric = 0.0;
  size_t coordinates = 0;
};

// Compares backward() against central differences for every coordinate of
// `params`. Error per coordinate is |a-n| / max(|a|, |n|, 1e-8).
GradCheckReport grad_check(const std::function<Var()>& f,
                           const std::vector<std::pair<std::string, Var>>& params,
                           double epsilon = 1e-5);

// Every non-frozen parameter of the store, in name order.
std::vector<std::pair<std::string, Var>> trainable(const ParameterStore& store);

}  // namespace calec
