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

// Shared helpers for the unit tests: seeded random matrices and naive
// reference implementations used as oracles.

#pragma once

#include <cmath>
#include <random>
#include <string>

#include "calec/numerics/params.hpp"
#include "calec/numerics/tensor.hpp"
#include "calec/text/chunker.hpp"

namespace calec::test {

inline Mat random_mat(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = 2.0 * unit_uniform(rng) - 1.0;
  return m;
}

inline Mat naive_matmul(const Mat& a, const Mat& b) {
  Mat out = Mat::Zero(a.rows(), b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < b.cols(); ++j) {
      for (Eigen::Index k = 0; k < a.cols(); ++k) out(i, j) += a(i, k) * b(k, j);
    }
  }
  return out;
}

// Row-wise softmax restricted to `keep`, computed directly from the formula.
inline Mat naive_masked_softmax(const Mat& s, const Mask& keep) {
  Mat out = Mat::Zero(s.rows(), s.cols());
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    double z = 0.0;
    for (Eigen::Index j = 0; j < s.cols(); ++j) {
      if (keep(i, j)) z += std::exp(s(i, j));
    }
    for (Eigen::Index j = 0; j < s.cols(); ++j) {
      if (keep(i, j)) out(i, j) = std::exp(s(i, j)) / z;
    }
  }
  return out;
}

inline Mat param(const ParameterStore& store, const std::string& name) {
  return store.get(name).value();
}

inline void set_param(ParameterStore& store, const std::string& name, const Mat& value) {
  Var v = store.get(name);
  v.mutable_value() = value;
}

inline Mat naive_layer_norm(const Mat& x, const Mat& gain, const Mat& bias) {
  Mat out(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    double mu = 0.0, var = 0.0;
    for (Eigen::Index k = 0; k < x.cols(); ++k) mu += x(i, k);
    mu /= static_cast<double>(x.cols());
    for (Eigen::Index k = 0; k < x.cols(); ++k) var += (x(i, k) - mu) * (x(i, k) - mu);
    var /= static_cast<double>(x.cols());
    for (Eigen::Index k = 0; k < x.cols(); ++k) {
      out(i, k) = (x(i, k) - mu) / std::sqrt(var + 1e-5) * gain(0, k) + bias(0, k);
    }
  }
  return out;
}

inline Mat naive_gelu(const Mat& x) {
  Mat out = x;
  const double c = std::sqrt(2.0 / M_PI);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double v = x.data()[i];
    out.data()[i] = 0.5 * v * (1.0 + std::tanh(c * (v + 0.044715 * v * v * v)));
  }
  return out;
}

inline Mat add_bias(Mat x, const Mat& bias) {
  for (Eigen::Index i = 0; i < x.rows(); ++i) x.row(i) += bias.row(0);
  return x;
}

// Scaled dot-product attention; returns the weights through `weights`.
inline Mat naive_attention(const Mat& q, const Mat& k, const Mat& v, const Mask& keep,
                           Mat* weights = nullptr) {
  Mat s = naive_matmul(q, k.transpose()) / std::sqrt(static_cast<double>(q.cols()));
  Mat w = naive_masked_softmax(s, keep);
  if (weights) *weights = w;
  return naive_matmul(w, v);
}

inline Mat naive_ffn(const ParameterStore& store, const std::string& prefix, const Mat& x) {
  Mat hidden = naive_gelu(add_bias(naive_matmul(x, param(store, prefix + ".up.weight")),
                                   param(store, prefix + ".up.bias")));
  return add_bias(naive_matmul(hidden, param(store, prefix + ".down.weight")),
                  param(store, prefix + ".down.bias"));
}

// h + Attn(LN(h)), then + FFN(LN(.)), composed by hand from the stored weights.
inline Mat naive_transformer_layer(const ParameterStore& store, const std::string& prefix,
                                   const Mat& h, const Mask& keep, Mat* weights = nullptr) {
  Mat x = naive_layer_norm(h, param(store, prefix + ".ln_attn.gain"),
                           param(store, prefix + ".ln_attn.bias"));
  Mat mid = h + naive_attention(naive_matmul(x, param(store, prefix + ".attn.wq")),
                                naive_matmul(x, param(store, prefix + ".attn.wk")),
                                naive_matmul(x, param(store, prefix + ".attn.wv")), keep, weights);
  Mat y = naive_layer_norm(mid, param(store, prefix + ".ln_ffn.gain"),
                           param(store, prefix + ".ln_ffn.bias"));
  return mid + naive_ffn(store, prefix + ".ffn", y);
}

// Random spans tiling `length` tokens.
inline ChunkSpans random_spans(int length, std::mt19937_64& rng) {
  ChunkSpans spans;
  int start = 0;
  while (start < length) {
    const int len = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(std::min(4, length - start)));
    spans.push_back({start, start + len});
    start += len;
  }
  return spans;
}

}  // namespace calec::test
