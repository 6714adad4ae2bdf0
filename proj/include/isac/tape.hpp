// Copyright 2026 The isac-e2e Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <functional>
#include <initializer_list>
#include <vector>

#include <Eigen/Dense>

namespace isac::nn {

using Matrix = Eigen::MatrixXd;

class Tape;

// Handle to a node recorded on a Tape. Batched quantities are laid out
// features x batch (one sample per column).
struct Var {
  Tape* tape = nullptr;
  int id = -1;

  const Matrix& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
};

// Reverse-mode recorder for a single forward evaluation. Nodes are stored in
// creation order, which is a valid topological order for the backward sweep.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Matrix value);
  Var constant(double value);
  Var parameter(Matrix value);

  const Matrix& value(Var v) const;
  bool requires_grad(Var v) const;

  // Seeds d(out)/d(out) = 1; out must be 1x1. A tape can be swept once.
  void backward(Var out);
  void backward(Var out, const Matrix& seed);

  // Gradient of the swept output w.r.t. v. Zero if v does not influence it.
  Matrix grad(Var v) const;
  bool finalized() const { return finalized_; }
  std::size_t size() const { return nodes_.size(); }

  using Backward = std::function<void(Tape&, const Matrix& out_value, const Matrix& out_grad)>;
  Var record(Matrix value, std::initializer_list<Var> inputs, Backward back);
  Var record(Matrix value, const std::vector<Var>& inputs, Backward back);
  void accumulate(Var v, const Matrix& g);

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    Backward back;
  };
  std::vector<Node> nodes_;
  bool finalized_ = false;
};

// Elementwise (same shape).
Var operator+(Var a, Var b);
Var operator-(Var a, Var b);
Var operator*(Var a, Var b);
Var operator/(Var a, Var b);
Var operator-(Var a);
Var operator*(double s, Var a);
Var operator*(Var a, double s);
Var operator+(Var a, double s);
inline Var operator+(double s, Var a) { return a + s; }
inline Var operator-(Var a, double s) { return a + (-s); }
Var operator/(double s, Var a);

Var matmul(Var a, Var b);
// W * X + b * 1^T
Var linear(Var weight, Var input, Var bias);
Var transpose(Var a);

Var relu(Var a);
Var sigmoid(Var a);
Var softplus(Var a);  // log(1 + exp(a))
Var tanh(Var a);
Var exp(Var a);
Var log(Var a);
Var sqrt(Var a);
Var square(Var a);
// Zero gradient outside [lo, hi].
Var clamp(Var a, double lo, double hi);
// Column-wise softmax.
Var softmax(Var a);

Var sum(Var a);            // -> 1x1
Var mean(Var a);           // -> 1x1
Var sum_rows(Var a);       // R x C -> 1 x C
Var broadcast_rows(Var a, Eigen::Index rows);   // 1 x C -> rows x C
Var broadcast_cols(Var a, Eigen::Index cols);   // R x 1 -> R x cols
Var broadcast(Var a, Eigen::Index rows, Eigen::Index cols);  // 1x1 -> rows x cols
Var slice_rows(Var a, Eigen::Index start, Eigen::Index count);
Var concat_rows(const std::vector<Var>& parts);

// Complex quantity carried as a pair of real nodes of equal shape.
struct CVar {
  Var re;
  Var im;
};
CVar operator+(CVar a, CVar b);
CVar operator*(CVar a, CVar b);
// Elementwise product with a constant complex matrix of the same shape.
CVar cmul(const Eigen::MatrixXcd& c, CVar a);
// Constant matrix C (complex) times column vector(s) a: C * a.
CVar cmatmul(const Eigen::MatrixXcd& c, CVar a);
Var abs2(CVar a);

}  // namespace isac::nn
