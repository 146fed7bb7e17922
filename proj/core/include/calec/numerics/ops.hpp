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

// Differentiable primitives over Var. Every op validates shapes and throws
// ShapeError on mismatch.

#pragma once

#include <optional>
#include <span>
#include <vector>

#include "calec/numerics/tensor.hpp"

namespace calec::ops {

Var matmul(const Var& a, const Var& b);
Var transpose(const Var& a);
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var hadamard(const Var& a, const Var& b);
// a + bias, with a 1xC bias broadcast over rows.
Var add_row(const Var& a, const Var& bias);
// Scales row i of `a` by column vector c (Rx1).
Var scale_rows(const Var& a, const Var& c);
// alpha * a + beta, elementwise.
Var affine(const Var& a, double alpha, double beta = 0.0);

Var gelu(const Var& a);
Var sigmoid(const Var& a);
Var log(const Var& a);

// Row-wise layer normalization with 1xC gain and bias.
Var layer_norm(const Var& a, const Var& gain, const Var& bias, double eps = 1e-5);

// Row-wise softmax restricted to mask==true entries; masked entries are exactly
// zero. Throws DegenerateMaskError naming the first all-false row.
Var masked_softmax_rows(const Var& scores, const Mask& mask);
Var softmax_rows(const Var& scores);
Var log_softmax_rows(const Var& scores);

Var concat_cols(const std::vector<Var>& parts);
Var concat_rows(const std::vector<Var>& parts);
Var slice_rows(const Var& a, Eigen::Index start, Eigen::Index count);
// out[i] = table[ids[i]]; gradient scatters back into the table rows.
Var gather_rows(const Var& table, std::span<const int> ids);
// out[i] = a(rows[i], cols[i]) as an Nx1 column.
Var pick(const Var& a, std::span<const int> rows, std::span<const int> cols);

Var sum(const Var& a);
Var mean(const Var& a);

// x W (+ bias). x.cols must equal W.rows.
Var linear(const Var& x, const Var& w, const std::optional<Var>& bias = std::nullopt);

// Result of scaled dot-product attention.
struct AttentionResult {
  Var output;   // weights * V
  Var weights;  // masked softmax of scores
  Var scores;   // Q K^T / sqrt(d) before masking
};

// weights[i] = masked_softmax(Q[i] K^T / sqrt(d), mask[i]); output = weights V.
AttentionResult attention(const Var& q, const Var& k, const Var& v, const Mask& mask);

// -log softmax(logits)[target] for a 1xC logits row.
Var cross_entropy(const Var& logits, int target);

}  // namespace calec::ops

namespace calec {

// Plain (non-graph) helpers shared with the decoding path.
std::vector<double> masked_softmax(std::span<const double> scores,
                                   const std::vector<bool>& mask);

}  // namespace calec
