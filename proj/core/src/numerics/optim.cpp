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

#include "calec/numerics/optim.hpp"

#include <algorithm>
#include <cmath>

#include "calec/errors.hpp"

namespace calec {

double AdamState::learning_rate_for(const std::string& name) const {
  double lr = base_lr;
  size_t best = 0;
  for (const auto& [prefix, rate] : group_lr) {
    if (prefix.size() >= best && name.rfind(prefix, 0) == 0) {
      best = prefix.size();
      lr = rate;
    }
  }
  return lr;
}

double AdamState::decay_factor() const {
  if (total_steps <= 0) return 1.0;
  return std::max(0.0, 1.0 - static_cast<double>(step) / static_cast<double>(total_steps));
}

void adam_step(ParameterStore& store, const GradientMap& grads, AdamState& state) {
  for (const auto& [name, g] : grads) {
    const Var& p = store.get(name);
    if (g.rows() != p.rows() || g.cols() != p.cols()) {
      throw ShapeError("adam_step: gradient " + shape_string(g) + " for parameter '" + name +
                       "' of shape " + shape_string(p.value()));
    }
  }
  const double decay = state.decay_factor();
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  for (const auto& [name, g] : grads) {
    if (store.is_frozen(name)) continue;
    Var p = store.get(name);
    auto& m = state.first_moment[name];
    auto& v = state.second_moment[name];
    if (m.size() == 0) {
      m = Mat::Zero(g.rows(), g.cols());
      v = Mat::Zero(g.rows(), g.cols());
    }
    m = state.beta1 * m + (1.0 - state.beta1) * g;
    v = state.beta2 * v + (1.0 - state.beta2) * g.cwiseProduct(g);
    const double lr = state.learning_rate_for(name) * decay;
    Mat update = (m.array() / c1) / ((v.array() / c2).sqrt() + state.eps);
    p.mutable_value() -= lr * update;
  }
}

GradCheckReport grad_check(const std::function<Var()>& f,
                           const std::vector<std::pair<std::string, Var>>& params,
                           double epsilon) {
  if (!(epsilon > 0.0)) throw ConfigError("grad_check: epsilon must be positive");
  for (const auto& [_, p] : params) const_cast<Var&>(p).zero_grad();
  Var loss = f();
  if (!std::isfinite(loss.item())) throw NumericError("grad_check: non-finite loss");
  backward(loss);

  GradCheckReport report;
  NoGradGuard no_grad;
  for (const auto& [name, p] : params) {
    Var handle = p;
    Mat analytic = handle.grad();
    Mat& value = handle.mutable_value();
    for (Eigen::Index i = 0; i < value.size(); ++i) {
      double saved = value.data()[i];
      value.data()[i] = saved + epsilon;
      double up = f().item();
      value.data()[i] = saved - epsilon;
      double down = f().item();
      value.data()[i] = saved;
      if (!std::isfinite(up) || !std::isfinite(down)) {
        throw NumericError("grad_check: non-finite loss perturbing '" + name + "'");
      }
      double n = (up - down) / (2.0 * epsilon);
      double a = analytic.data()[i];
      double err = std::abs(a - n) / std::max({std::abs(a), std::abs(n), 1e-8});
      ++report.coordinates;
      report.max_absolute_error = std::max(report.max_absolute_error, std::abs(a - n));
      report.max_floored_error = std::max(
          report.max_floored_error, std::abs(a - n) / std::max({std::abs(a), std::abs(n), 1e-5}));
      if (err > report.max_relative_error || report.worst_index < 0) {
        report.max_relative_error = std::max(report.max_relative_error, err);
        report.worst_parameter = name;
        report.worst_index = i;
        report.analytic = a;
        report.numeric = n;
      }
    }
  }
  return report;
}

std::vector<std::pair<std::string, Var>> trainable(const ParameterStore& store) {
  std::vector<std::pair<std::string, Var>> out;
  for (const auto& [name, v] : store.all()) {
    if (!store.is_frozen(name)) out.emplace_back(name, v);
  }
  return out;
}

}  // namespace calec
