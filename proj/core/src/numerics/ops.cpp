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

#include "calec/numerics/ops.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "calec/errors.hpp"

namespace calec::ops {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ShapeError(what);
}

std::string dims(const Var& a) { return shape_string(a.value()); }

// Accumulates into parent i when it takes part in differentiation.
template <typename G>
void push(Node& self, size_t i, G&& g) {
  Node& p = *self.parents[i];
  if (p.requires_grad) p.accumulate(Mat(std::forward<G>(g)));
}

constexpr double kGeluC = 0.7978845608028654;  // sqrt(2/pi)

// Softmax of one row over the kept entries. Returns false if none are kept.
template <typename In, typename Keep, typename Out>
bool softmax_row(const In& in, const Keep& keep, Out&& out) {
  const Eigen::Index n = in.size();
  double mx = -std::numeric_limits<double>::infinity();
  bool any = false;
  for (Eigen::Index j = 0; j < n; ++j) {
    if (keep(j)) {
      mx = std::max(mx, in(j));
      any = true;
    }
  }
  if (!any) return false;
  double total = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    if (keep(j)) {
      out(j) = std::exp(in(j) - mx);
      total += out(j);
    } else {
      out(j) = 0.0;
    }
  }
  for (Eigen::Index j = 0; j < n; ++j) out(j) /= total;
  return true;
}

Var softmax_backward_node(Mat y, const Var& scores) {
  return Var::make(std::move(y), {scores}, [](Node& self) {
    const Mat& y = self.value;
    Mat dot = (self.grad.cwiseProduct(y)).rowwise().sum();
    Mat dx = y.cwiseProduct(self.grad - dot.replicate(1, y.cols()));
    push(self, 0, dx);
  });
}

}  // namespace

Var matmul(const Var& a, const Var& b) {
  require(a.cols() == b.rows(), "matmul: " + dims(a) + " * " + dims(b));
  return Var::make(a.value() * b.value(), {a, b}, [](Node& self) {
    const Mat& av = self.parents[0]->value;
    const Mat& bv = self.parents[1]->value;
    if (self.parents[0]->requires_grad) push(self, 0, self.grad * bv.transpose());
    if (self.parents[1]->requires_grad) push(self, 1, av.transpose() * self.grad);
  });
}

Var transpose(const Var& a) {
  return Var::make(a.value().transpose(), {a},
                   [](Node& self) { push(self, 0, self.grad.transpose()); });
}

Var add(const Var& a, const Var& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), "add: " + dims(a) + " + " + dims(b));
  return Var::make(a.value() + b.value(), {a, b}, [](Node& self) {
    push(self, 0, self.grad);
    push(self, 1, self.grad);
  });
}

Var sub(const Var& a, const Var& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), "sub: " + dims(a) + " - " + dims(b));
  return Var::make(a.value() - b.value(), {a, b}, [](Node& self) {
    push(self, 0, self.grad);
    push(self, 1, -self.grad);
  });
}

Var hadamard(const Var& a, const Var& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(),
          "hadamard: " + dims(a) + " .* " + dims(b));
  return Var::make(a.value().cwiseProduct(b.value()), {a, b}, [](Node& self) {
    push(self, 0, self.grad.cwiseProduct(self.parents[1]->value));
    push(self, 1, self.grad.cwiseProduct(self.parents[0]->value));
  });
}

Var add_row(const Var& a, const Var& bias) {
  require(bias.rows() == 1 && bias.cols() == a.cols(),
          "add_row: " + dims(a) + " + bias " + dims(bias));
  Mat out = a.value();
  out.rowwise() += bias.value().row(0);
  return Var::make(std::move(out), {a, bias}, [](Node& self) {
    push(self, 0, self.grad);
    push(self, 1, self.grad.colwise().sum());
  });
}

Var scale_rows(const Var& a, const Var& c) {
  require(c.cols() == 1 && c.rows() == a.rows(), "scale_rows: " + dims(a) + " by " + dims(c));
  Mat out = a.value();
  for (Eigen::Index i = 0; i < out.rows(); ++i) out.row(i) *= c.value()(i, 0);
  return Var::make(std::move(out), {a, c}, [](Node& self) {
    const Mat& av = self.parents[0]->value;
    const Mat& cv = self.parents[1]->value;
    if (self.parents[0]->requires_grad) {
      Mat da = self.grad;
      for (Eigen::Index i = 0; i < da.rows(); ++i) da.row(i) *= cv(i, 0);
      push(self, 0, da);
    }
    if (self.parents[1]->requires_grad) {
      push(self, 1, self.grad.cwiseProduct(av).rowwise().sum());
    }
  });
}

Var affine(const Var& a, double alpha, double beta) {
  Mat out = (a.value().array() * alpha + beta).matrix();
  return Var::make(std::move(out), {a},
                   [alpha](Node& self) { push(self, 0, self.grad * alpha); });
}

Var gelu(const Var& a) {
  Mat out = a.value().unaryExpr([](double x) {
    return 0.5 * x * (1.0 + std::tanh(kGeluC * (x + 0.044715 * x * x * x)));
  });
  return Var::make(std::move(out), {a}, [](Node& self) {
    Mat d = self.parents[0]->value.unaryExpr([](double x) {
      double t = std::tanh(kGeluC * (x + 0.044715 * x * x * x));
      return 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * kGeluC * (1.0 + 3.0 * 0.044715 * x * x);
    });
    push(self, 0, self.grad.cwiseProduct(d));
  });
}

Var sigmoid(const Var& a) {
  Mat out = a.value().unaryExpr([](double x) {
    return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
  });
  return Var::make(std::move(out), {a}, [](Node& self) {
    const Mat& y = self.value;
    push(self, 0, self.grad.cwiseProduct(y.cwiseProduct((1.0 - y.array()).matrix())));
  });
}

Var log(const Var& a) {
  if ((a.value().array() <= 0.0).any()) throw NumericError("log of a non-positive value");
  return Var::make(a.value().array().log().matrix(), {a}, [](Node& self) {
    push(self, 0, self.grad.cwiseQuotient(self.parents[0]->value));
  });
}

Var layer_norm(const Var& a, const Var& gain, const Var& bias, double eps) {
  const Eigen::Index n = a.cols();
  require(gain.rows() == 1 && gain.cols() == n && bias.rows() == 1 && bias.cols() == n,
          "layer_norm: " + dims(a) + " with gain " + dims(gain));
  const Mat& x = a.value();
  Mat xhat(x.rows(), n);
  Mat inv(x.rows(), 1);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    double mu = x.row(i).mean();
    double var = (x.row(i).array() - mu).square().mean();
    inv(i, 0) = 1.0 / std::sqrt(var + eps);
    xhat.row(i) = (x.row(i).array() - mu) * inv(i, 0);
  }
  Mat out = xhat;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    out.row(i) = out.row(i).cwiseProduct(gain.value().row(0)) + bias.value().row(0);
  }
  return Var::make(std::move(out), {a, gain, bias}, [xhat, inv](Node& self) {
    const Mat& g = self.grad;
    const Mat& gv = self.parents[1]->value;
    if (self.parents[0]->requires_grad) {
      Mat dx(g.rows(), g.cols());
      for (Eigen::Index i = 0; i < g.rows(); ++i) {
        RowVec dxhat = g.row(i).cwiseProduct(gv.row(0));
        double m1 = dxhat.mean();
        double m2 = dxhat.cwiseProduct(xhat.row(i)).mean();
        dx.row(i) = inv(i, 0) * (dxhat.array() - m1 - xhat.row(i).array() * m2).matrix();
      }
      push(self, 0, dx);
    }
    push(self, 1, g.cwiseProduct(xhat).colwise().sum());
    push(self, 2, g.colwise().sum());
  });
}

Var masked_softmax_rows(const Var& scores, const Mask& mask) {
  require(mask.rows() == scores.rows() && mask.cols() == scores.cols(),
          "masked_softmax: scores " + dims(scores) + " vs mask " +
              std::to_string(mask.rows()) + "x" + std::to_string(mask.cols()));
  const Mat& s = scores.value();
  Mat y(s.rows(), s.cols());
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    auto row_in = s.row(i);
    auto row_mask = mask.row(i);
    if (!softmax_row(row_in, [&](Eigen::Index j) { return row_mask(j); }, y.row(i))) {
      throw DegenerateMaskError("masked_softmax: mask row " + std::to_string(i) +
                                " keeps no entries");
    }
  }
  return softmax_backward_node(std::move(y), scores);
}

Var softmax_rows(const Var& scores) {
  const Mat& s = scores.value();
  Mat y(s.rows(), s.cols());
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    if (!softmax_row(s.row(i), [](Eigen::Index) { return true; }, y.row(i))) {
      throw DegenerateMaskError("softmax over an empty row");
    }
  }
  return softmax_backward_node(std::move(y), scores);
}

Var log_softmax_rows(const Var& scores) {
  const Mat& s = scores.value();
  Mat out(s.rows(), s.cols());
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    double mx = s.row(i).maxCoeff();
    double lse = mx + std::log((s.row(i).array() - mx).exp().sum());
    out.row(i) = (s.row(i).array() - lse).matrix();
  }
  return Var::make(std::move(out), {scores}, [](Node& self) {
    Mat p = self.value.array().exp().matrix();
    Mat total = self.grad.rowwise().sum();
    push(self, 0, self.grad - p.cwiseProduct(total.replicate(1, p.cols())));
  });
}

Var concat_cols(const std::vector<Var>& parts) {
  require(!parts.empty(), "concat_cols: no parts");
  Eigen::Index rows = parts[0].rows();
  Eigen::Index cols = 0;
  for (const auto& p : parts) {
    require(p.rows() == rows, "concat_cols: row mismatch " + dims(p));
    cols += p.cols();
  }
  Mat out(rows, cols);
  std::vector<Eigen::Index> offsets;
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    offsets.push_back(at);
    out.middleCols(at, p.cols()) = p.value();
    at += p.cols();
  }
  return Var::make(std::move(out), parts, [offsets](Node& self) {
    for (size_t i = 0; i < self.parents.size(); ++i) {
      push(self, i, self.grad.middleCols(offsets[i], self.parents[i]->value.cols()));
    }
  });
}

Var concat_rows(const std::vector<Var>& parts) {
  require(!parts.empty(), "concat_rows: no parts");
  Eigen::Index cols = parts[0].cols();
  Eigen::Index rows = 0;
  for (const auto& p : parts) {
    require(p.cols() == cols, "concat_rows: column mismatch " + dims(p));
    rows += p.rows();
  }
  Mat out(rows, cols);
  std::vector<Eigen::Index> offsets;
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    offsets.push_back(at);
    out.middleRows(at, p.rows()) = p.value();
    at += p.rows();
  }
  return Var::make(std::move(out), parts, [offsets](Node& self) {
    for (size_t i = 0; i < self.parents.size(); ++i) {
      push(self, i, self.grad.middleRows(offsets[i], self.parents[i]->value.rows()));
    }
  });
}

Var slice_rows(const Var& a, Eigen::Index start, Eigen::Index count) {
  require(start >= 0 && count >= 0 && start + count <= a.rows(),
          "slice_rows: [" + std::to_string(start) + ", +" + std::to_string(count) + ") of " +
              dims(a));
  return Var::make(a.value().middleRows(start, count), {a}, [start](Node& self) {
    const Mat& av = self.parents[0]->value;
    Mat g = Mat::Zero(av.rows(), av.cols());
    g.middleRows(start, self.grad.rows()) = self.grad;
    push(self, 0, g);
  });
}

Var gather_rows(const Var& table, std::span<const int> ids) {
  const Mat& t = table.value();
  Mat out(static_cast<Eigen::Index>(ids.size()), t.cols());
  for (size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || ids[i] >= t.rows()) {
      throw IndexError("gather_rows: id " + std::to_string(ids[i]) + " outside table of " +
                       std::to_string(t.rows()) + " rows");
    }
    out.row(static_cast<Eigen::Index>(i)) = t.row(ids[i]);
  }
  std::vector<int> idx(ids.begin(), ids.end());
  return Var::make(std::move(out), {table}, [idx](Node& self) {
    const Mat& tv = self.parents[0]->value;
    Mat g = Mat::Zero(tv.rows(), tv.cols());
    for (size_t i = 0; i < idx.size(); ++i) g.row(idx[i]) += self.grad.row(static_cast<Eigen::Index>(i));
    push(self, 0, g);
  });
}

Var pick(const Var& a, std::span<const int> rows, std::span<const int> cols) {
  require(rows.size() == cols.size(), "pick: index lists differ in length");
  Mat out(static_cast<Eigen::Index>(rows.size()), 1);
  for (size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || rows[i] >= a.rows() || cols[i] < 0 || cols[i] >= a.cols()) {
      throw IndexError("pick: (" + std::to_string(rows[i]) + ", " + std::to_string(cols[i]) +
                       ") outside " + dims(a));
    }
    out(static_cast<Eigen::Index>(i), 0) = a.value()(rows[i], cols[i]);
  }
  std::vector<int> r(rows.begin(), rows.end());
  std::vector<int> c(cols.begin(), cols.end());
  return Var::make(std::move(out), {a}, [r, c](Node& self) {
    const Mat& av = self.parents[0]->value;
    Mat g = Mat::Zero(av.rows(), av.cols());
    for (size_t i = 0; i < r.size(); ++i) g(r[i], c[i]) += self.grad(static_cast<Eigen::Index>(i), 0);
    push(self, 0, g);
  });
}

Var sum(const Var& a) {
  Mat out(1, 1);
  out(0, 0) = a.value().sum();
  return Var::make(std::move(out), {a}, [](Node& self) {
    const Mat& av = self.parents[0]->value;
    push(self, 0, Mat::Constant(av.rows(), av.cols(), self.grad(0, 0)));
  });
}

Var mean(const Var& a) {
  require(a.value().size() > 0, "mean of an empty tensor");
  return affine(sum(a), 1.0 / static_cast<double>(a.value().size()));
}

Var linear(const Var& x, const Var& w, const std::optional<Var>& bias) {
  require(x.cols() == w.rows(), "linear: x " + dims(x) + " W " + dims(w));
  Var out = matmul(x, w);
  if (bias) out = add_row(out, *bias);
  return out;
}

AttentionResult attention(const Var& q, const Var& k, const Var& v, const Mask& mask) {
  require(q.cols() == k.cols(), "attention: Q " + dims(q) + " K " + dims(k));
  require(k.rows() == v.rows(), "attention: K " + dims(k) + " V " + dims(v));
  require(mask.rows() == q.rows() && mask.cols() == k.rows(), "attention: mask shape");
  Var scores = affine(matmul(q, transpose(k)), 1.0 / std::sqrt(static_cast<double>(q.cols())));
  Var weights = masked_softmax_rows(scores, mask);
  return {matmul(weights, v), weights, scores};
}

Var cross_entropy(const Var& logits, int target) {
  require(logits.rows() == 1, "cross_entropy expects a 1xC logits row, got " + dims(logits));
  if (target < 0 || target >= logits.cols()) {
    throw IndexError("cross_entropy: target " + std::to_string(target) + " outside " +
                     std::to_string(logits.cols()) + " classes");
  }
  std::vector<int> r{0}, c{target};
  return affine(pick(log_softmax_rows(logits), r, c), -1.0);
}

}  // namespace calec::ops

namespace calec {

std::vector<double> masked_softmax(std::span<const double> scores,
                                   const std::vector<bool>& mask) {
  if (scores.size() != mask.size()) throw ShapeError("masked_softmax: scores/mask length differ");
  std::vector<double> out(scores.size());
  Eigen::Map<const RowVec> in(scores.data(), static_cast<Eigen::Index>(scores.size()));
  Eigen::Map<RowVec> dst(out.data(), static_cast<Eigen::Index>(out.size()));
  if (!ops::softmax_row(in, [&](Eigen::Index j) { return bool(mask[j]); }, dst)) {
    throw DegenerateMaskError("masked_softmax: mask keeps no entries");
  }
  return out;
}

}  // namespace calec
