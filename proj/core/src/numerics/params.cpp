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

#include "calec/numerics/params.hpp"

#include <cmath>
#include <cstring>

#include "calec/errors.hpp"

namespace calec {

Var ParameterStore::create(const std::string& name, Mat init) {
  if (params_.count(name)) throw ConfigError("duplicate parameter name '" + name + "'");
  if (!init.allFinite()) throw NumericError("non-finite initial value for '" + name + "'");
  Var v(std::move(init), true);
  params_.emplace(name, v);
  return v;
}

const Var& ParameterStore::get(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw ConfigError("unknown parameter '" + name + "'");
  return it->second;
}

size_t ParameterStore::scalar_count() const {
  size_t n = 0;
  for (const auto& [_, v] : params_) n += static_cast<size_t>(v.value().size());
  return n;
}

void ParameterStore::freeze(const std::string& name) {
  if (!contains(name)) throw ConfigError("cannot freeze unknown parameter '" + name + "'");
  frozen_.insert(name);
}

void ParameterStore::freeze_prefix(const std::string& prefix) {
  for (const auto& [name, _] : params_) {
    if (name.rfind(prefix, 0) == 0) frozen_.insert(name);
  }
}

GradientMap ParameterStore::gradients() const {
  GradientMap out;
  for (const auto& [name, v] : params_) {
    if (!is_frozen(name)) out.emplace(name, v.grad());
  }
  return out;
}

void ParameterStore::zero_grad() {
  for (auto& [_, v] : params_) v.zero_grad();
}

std::uint64_t ParameterStore::fingerprint(const std::string& prefix) const {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const void* data, size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 1099511628211ULL;
    }
  };
  for (const auto& [name, v] : params_) {
    if (name.rfind(prefix, 0) != 0) continue;
    mix(name.data(), name.size());
    mix(v.value().data(), sizeof(double) * static_cast<size_t>(v.value().size()));
  }
  return h;
}

Mat Initializer::xavier(Eigen::Index fan_in, Eigen::Index fan_out) {
  double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  return uniform(fan_in, fan_out, limit);
}

Mat Initializer::uniform(Eigen::Index rows, Eigen::Index cols, double limit) {
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    m.data()[i] = (2.0 * unit_uniform(rng_) - 1.0) * limit;
  }
  return m;
}

}  // namespace calec
