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

// Dense 2-D tensors with a small reverse-mode autograd.
//
// A Var is a shared handle to a graph node holding a row-major matrix value,
// an accumulated gradient, and the closure that pushes the node's gradient to
// its parents. Graphs are built eagerly as ops run; backward() walks them in
// reverse topological order. Inside a NoGradGuard scope ops record nothing.

#pragma once

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace calec {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVec = Eigen::Matrix<double, 1, Eigen::Dynamic>;
using Mask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Node {
  Mat value;
  Mat grad;  // empty until the first accumulation
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward;

  void accumulate(const Mat& g);
};

class Var {
 public:
  Var() = default;
  explicit Var(Mat value, bool requires_grad = false);

  // Creates a node whose gradient flows to `parents` through `backward`.
  // Recording is skipped (plain constant) when no parent needs a gradient or
  // a NoGradGuard is active.
  static Var make(Mat value, std::vector<Var> parents,
                  std::function<void(Node&)> backward);

  bool defined() const { return node_ != nullptr; }
  const Mat& value() const { return node_->value; }
  Mat& mutable_value() { return node_->value; }
  // Gradient of the last backward pass, zero-filled if nothing reached it.
  Mat grad() const;
  void zero_grad() { node_->grad.resize(0, 0); }
  bool requires_grad() const { return node_ && node_->requires_grad; }
  void set_requires_grad(bool on) { node_->requires_grad = on; }

  Eigen::Index rows() const { return node_->value.rows(); }
  Eigen::Index cols() const { return node_->value.cols(); }
  double item() const;

  Node* node() const { return node_.get(); }
  const std::shared_ptr<Node>& shared() const { return node_; }

 private:
  std::shared_ptr<Node> node_;
};

// Runs reverse-mode accumulation from a 1x1 loss. Leaf gradients accumulate
// across calls until zero_grad().
void backward(const Var& loss);

// Disables graph recording for the current thread while alive.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_enabled();

std::string shape_string(const Mat& m);

}  // namespace calec
