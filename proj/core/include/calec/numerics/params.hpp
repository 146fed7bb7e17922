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

#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "calec/numerics/tensor.hpp"

namespace calec {

using GradientMap = std::map<std::string, Mat>;

// Named trainable tensors. Names are unique and ordered; frozen names are
// skipped by gradients() and by the optimizer.
class ParameterStore {
 public:
  // Registers a new leaf parameter. Throws ConfigError on a duplicate name.
  Var create(const std::string& name, Mat init);

  bool contains(const std::string& name) const { return params_.count(name) != 0; }
  const Var& get(const std::string& name) const;
  const std::map<std::string, Var>& all() const { return params_; }
  size_t size() const { return params_.size(); }
  size_t scalar_count() const;

  void freeze(const std::string& name);
  // Freezes every parameter whose name starts with `prefix`.
  void freeze_prefix(const std::string& prefix);
  void unfreeze_all() { frozen_.clear(); }
  bool is_frozen(const std::string& name) const { return frozen_.count(name) != 0; }
  const std::set<std::string>& frozen() const { return frozen_; }

  // Accumulated gradients of every non-frozen parameter.
  GradientMap gradients() const;
  void zero_grad();

  // FNV-1a over names and raw value bytes of parameters matching `prefix`.
  std::uint64_t fingerprint(const std::string& prefix = "") const;

 private:
  std::map<std::string, Var> params_;
  std::set<std::string> frozen_;
};

// Xavier-uniform initializer drawing from a seeded 64-bit Mersenne Twister.
class Initializer {
 public:
  explicit Initializer(std::uint64_t seed) : rng_(seed) {}
  Mat xavier(Eigen::Index fan_in, Eigen::Index fan_out);
  Mat uniform(Eigen::Index rows, Eigen::Index cols, double limit);

 private:
  std::mt19937_64 rng_;
};

// Uniform double in [0, 1) from the top 53 bits of one draw; identical across
// standard libraries, unlike std::uniform_real_distribution.
inline double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace calec
