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

#include "isac/tape.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace isac::nn {
namespace {

Tape& tape_of(Var a) {
  if (a.tape == nullptr) throw std::logic_error("Var is not bound to a tape");
  return *a.tape;
}

Tape& tape_of(Var a, Var b) {
  if (a.tape != b.tape) throw std::logic_error("Vars recorded on different tapes");
  return tape_of(a);
}

void require_same_shape(Var a, Var b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument(std::string(op) + ": shape mismatch (" + std::to_string(a.rows()) + "x" +
                                std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                                std::to_string(b.cols()) + ")");
}

}  // namespace

const Matrix& Var::value() const { return tape_of(*this).value(*this); }

Var Tape::constant(Matrix value) {
  nodes_.push_back(Node{std::move(value), {}, false, nullptr});
  return Var{this, static_cast<int>(nodes_.size()) - 1};
}

Var Tape::constant(double value) { return constant(Matrix::Constant(1, 1, value)); }

Var Tape::parameter(Matrix value) {
  nodes_.push_back(Node{std::move(value), {}, true, nullptr});
  return Var{this, static_cast<int>(nodes_.size()) - 1};
}

const Matrix& Tape::value(Var v) const { return nodes_.at(static_cast<std::size_t>(v.id)).value; }

bool Tape::requires_grad(Var v) const { return nodes_.at(static_cast<std::size_t>(v.id)).requires_grad; }

Var Tape::record(Matrix value, std::initializer_list<Var> inputs, Backward back) {
  return record(std::move(value), std::vector<Var>(inputs), std::move(back));
}

Var Tape::record(Matrix value, const std::vector<Var>& inputs, Backward back) {
  if (finalized_) throw std::logic_error("Tape: cannot record after backward()");
  bool needs = false;
  for (Var in : inputs) {
    if (in.tape != this) throw std::logic_error("Tape: input recorded on a different tape");
    needs = needs || requires_grad(in);
  }
  nodes_.push_back(Node{std::move(value), {}, needs, needs ? std::move(back) : nullptr});
  return Var{this, static_cast<int>(nodes_.size()) - 1};
}

void Tape::accumulate(Var v, const Matrix& g) {
  Node& n = nodes_[static_cast<std::size_t>(v.id)];
  if (!n.requires_grad) return;
  if (n.grad.size() == 0)
    n.grad = g;
  else
    n.grad += g;
}

void Tape::backward(Var out) {
  if (value(out).size() != 1) throw std::invalid_argument("Tape::backward: output must be scalar without a seed");
  backward(out, Matrix::Ones(1, 1));
}

void Tape::backward(Var out, const Matrix& seed) {
  if (finalized_) throw std::logic_error("Tape::backward: tape already swept");
  if (out.tape != this || out.id < 0 || static_cast<std::size_t>(out.id) >= nodes_.size())
    throw std::logic_error("Tape::backward: output not recorded on this tape");
  if (seed.rows() != value(out).rows() || seed.cols() != value(out).cols())
    throw std::invalid_argument("Tape::backward: seed shape mismatch");
  finalized_ = true;
  accumulate(out, seed);
  for (int i = out.id; i >= 0; --i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (!n.back || n.grad.size() == 0) continue;
    n.back(*this, n.value, n.grad);
  }
}

Matrix Tape::grad(Var v) const {
  if (!finalized_) throw std::logic_error("Tape::grad: tape not finalized (call backward first)");
  const Node& n = nodes_.at(static_cast<std::size_t>(v.id));
  if (n.grad.size() == 0) return Matrix::Zero(n.value.rows(), n.value.cols());
  return n.grad;
}

Var operator+(Var a, Var b) {
  require_same_shape(a, b, "add");
  return tape_of(a, b).record(a.value() + b.value(), {a, b}, [a, b](Tape& t, const Matrix&, const Matrix& g) {
    t.accumulate(a, g);
    t.accumulate(b, g);
  });
}

Var operator-(Var a, Var b) {
  require_same_shape(a, b, "sub");
  return tape_of(a, b).record(a.value() - b.value(), {a, b}, [a, b](Tape& t, const Matrix&, const Matrix& g) {
    t.accumulate(a, g);
    t.accumulate(b, -g);
  });
}

Var operator*(Var a, Var b) {
  require_same_shape(a, b, "mul");
  return tape_of(a, b).record(a.value().cwiseProduct(b.value()), {a, b},
                              [a, b](Tape& t, const Matrix&, const Matrix& g) {
                                if (t.requires_grad(a)) t.accumulate(a, g.cwiseProduct(b.value()));
                                if (t.requires_grad(b)) t.accumulate(b, g.cwiseProduct(a.value()));
                              });
}

Var operator/(Var a, Var b) {
  require_same_shape(a, b, "div");
  return tape_of(a, b).record(a.value().cwiseQuotient(b.value()), {a, b},
                              [a, b](Tape& t, const Matrix& out, const Matrix& g) {
                                const Matrix gb = g.cwiseQuotient(b.value());
                                if (t.requires_grad(a)) t.accumulate(a, gb);
                                if (t.requires_grad(b)) t.accumulate(b, -gb.cwiseProduct(out));
                              });
}

Var operator-(Var a) { return -1.0 * a; }

Var operator*(double s, Var a) {
  return tape_of(a).record(s * a.value(), {a}, [a, s](Tape& t, const Matrix&, const Matrix& g) {
    t.accumulate(a, s * g);
  });
}

Var operator*(Var a, double s) { return s * a; }

Var operator+(Var a, double s) {
  return tape_of(a).record(a.value().array() + s, {a},
                           [a](Tape& t, const Matrix&, const Matrix& g) { t.accumulate(a, g); });
}

Var operator/(double s, Var a) {
  return tape_of(a).record(s * a.value().cwiseInverse(), {a}, [a](Tape& t, const Matrix& y, const Matrix& g) {
    t.accumulate(a, -g.cwiseProduct(y).cwiseQuotient(a.value()));
  });
}

Var matmul(Var a, Var b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("matmul: inner dimension mismatch");
  return tape_of(a, b).record(a.value() * b.value(), {a, b}, [a, b](Tape& t, const Matrix&, const Matrix& g) {
    if (t.requires_grad(a)) t.accumulate(a, g * b.value().transpose());
    if (t.requires_grad(b)) t.accumulate(b, a.value().transpose() * g);
  });
}

Var linear(Var weight, Var input, Var bias) {
  if (weight.cols() != input.rows()) throw std::invalid_argument("linear: weight/input dimension mismatch");
  if (bias.rows() != weight.rows() || bias.cols() != 1) throw std::invalid_argument("linear: bias shape mismatch");
  Matrix out = weight.value() * input.value();
  out.colwise() += bias.value().col(0);
  Tape& t0 = tape_of(weight, input);
  tape_of(weight, bias);
  return t0.record(std::move(out), {weight, input, bias},
                   [weight, input, bias](Tape& t, const Matrix&, const Matrix& g) {
                     if (t.requires_grad(weight)) t.accumulate(weight, g * input.value().transpose());
                     if (t.requires_grad(bias)) t.accumulate(bias, g.rowwise().sum());
                     if (t.requires_grad(input)) t.accumulate(input, weight.value().transpose() * g);
                   });
}

Var transpose(Var a) {
  return tape_of(a).record(a.value().transpose(), {a}, [a](Tape& t, const Matrix&, const Matrix& g) {
    t.accumulate(a, g.transpose());
  });
}

Var relu(Var a) {
  return tape_of(a).record(a.value().cwiseMax(0.0), {a}, [a](Tape& t, const Matrix&, const Matrix& g) {
    t.accumulate(a, (a.value().array() > 0.0).select(g, 0.0));
  });
}

Var sigmoid(Var a) {
  Matrix out = a.value().unaryExpr([](double x) {
    // Split branches keep exp() from overflowing for large |x|.
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
  });
  return tape_of(a).record(std::move(out), {a}, [a](Tape& t, const Matrix& y, const Matrix& g) {
    t.accumulate(a, g.array() * y.array() * (1.0 - y.array()));
  });
}

Var softplus(Var a) {
  Matrix out = a.value().unaryExpr([](double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); });
  return tape_of(a).record(std::move(out), {a}, [a](Tape& t, const Matrix&, const Matrix& g) {
    const Matrix s = a.value().unaryExpr([](double x) {
      if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
      const double e = std::exp(x);
      return e / (1.0 + e);
    });
    t.accumulate(a, g.cwiseProduct(s));
  });
}

Var tanh(Var a) {
  return tape_of(a).record(a.value().array().tanh().matrix(), {a}, [a](Tape& t, const Matrix& y, const Matrix& g) {
    t.accumulate(a, g.array() * (1.0 - y.array().square()));
  });
}

Var exp(Var a) {
  return tape_of(a).record(a.value().array().exp().matrix(), {a}, [a](Tape& t, const Matrix& y, const Matrix& g) {
    t.accumulate(a, g.cwiseProduct(y));
  });
}

Var log(Var a) {
  return tape_of(a).record(a.value().array().log().matrix(), {a}, [a](Tape& t, const Matrix&, const Matrix& g) {
    t.accumulate(a, g.cwiseQuotient(a.value()));
  });
}

Var sqrt(Var a) {
  return tape_of(a).record(a.value().cwiseSqrt(), {a}, [a](Tape& t, const Matrix& y, const Matrix& g) {
    t.accumulate(a, 0.5 * g.cwiseQuotient(y));
  });
}

Var square(Var a) {
  return tape_of(a).record(a.value().array().square().matrix(), {a}, [a](Tape& t, const Matrix&, const Matrix& g) {
    t.accumulate(a, 2.0 * g.cwiseProduct(a.value()));
  });
}

Var clamp(Var a, double lo, double hi) {
  return tape_of(a).record(a.value().cwiseMax(lo).cwiseMin(hi), {a},
                           [a, lo, hi](Tape& t, const Matrix&, const Matrix& g) {
                             const auto& x = a.value().array();
                             t.accumulate(a, ((x >= lo) && (x <= hi)).select(g, 0.0));
                           });
}

Var softmax(Var a) {
  Matrix out = a.value();
  for (Eigen::Index c = 0; c < out.cols(); ++c) {
    auto col = out.col(c);
    col.array() -= col.maxCoeff();
    col = col.array().exp().matrix();
    col /= col.sum();
  }
  return tape_of(a).record(std::move(out), {a}, [a](Tape& t, const Matrix& y, const Matrix& g) {
    // dL/dx = y * (g - sum(g * y)) per column
    const Eigen::RowVectorXd dot = g.cwiseProduct(y).colwise().sum();
    Matrix gx = g;
    gx.rowwise() -= dot;
    t.accumulate(a, gx.cwiseProduct(y));
  });
}

Var sum(Var a) {
  return tape_of(a).record(Matrix::Constant(1, 1, a.value().sum()), {a},
                           [a](Tape& t, const Matrix&, const Matrix& g) {
                             t.accumulate(a, Matrix::Constant(a.rows(), a.cols(), g(0, 0)));
                           });
}

Var mean(Var a) {
  const double n = static_cast<double>(a.value().size());
  if (n == 0) throw std::invalid_argument("mean: empty input");
  return (1.0 / n) * sum(a);
}

Var sum_rows(Var a) {
  return tape_of(a).record(a.value().colwise().sum(), {a}, [a](Tape& t, const Matrix&, const Matrix& g) {
    t.accumulate(a, g.replicate(a.rows(), 1));
  });
}

Var broadcast_rows(Var a, Eigen::Index rows) {
  if (a.rows() != 1) throw std::invalid_argument("broadcast_rows: expected a row vector");
  return tape_of(a).record(a.value().replicate(rows, 1), {a}, [a](Tape& t, const Matrix&, const Matrix& g) {
    t.accumulate(a, g.colwise().sum());
  });
}

Var broadcast_cols(Var a, Eigen::Index cols) {
  if (a.cols() != 1) throw std::invalid_argument("broadcast_cols: expected a column vector");
  return tape_of(a).record(a.value().replicate(1, cols), {a}, [a](Tape& t, const Matrix&, const Matrix& g) {
    t.accumulate(a, g.rowwise().sum());
  });
}

Var broadcast(Var a, Eigen::Index rows, Eigen::Index cols) {
  if (a.value().size() != 1) throw std::invalid_argument("broadcast: expected a scalar");
  return tape_of(a).record(Matrix::Constant(rows, cols, a.value()(0, 0)), {a},
                           [a](Tape& t, const Matrix&, const Matrix& g) {
                             t.accumulate(a, Matrix::Constant(1, 1, g.sum()));
                           });
}

Var slice_rows(Var a, Eigen::Index start, Eigen::Index count) {
  if (start < 0 || count < 0 || start + count > a.rows()) throw std::out_of_range("slice_rows: range out of bounds");
  return tape_of(a).record(a.value().middleRows(start, count), {a},
                           [a, start, count](Tape& t, const Matrix&, const Matrix& g) {
                             Matrix full = Matrix::Zero(a.rows(), a.cols());
                             full.middleRows(start, count) = g;
                             t.accumulate(a, full);
                           });
}

Var concat_rows(const std::vector<Var>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_rows: no inputs");
  Eigen::Index rows = 0;
  const Eigen::Index cols = parts.front().cols();
  for (Var p : parts) {
    if (p.cols() != cols) throw std::invalid_argument("concat_rows: column count mismatch");
    rows += p.rows();
  }
  Matrix out(rows, cols);
  Eigen::Index r = 0;
  for (Var p : parts) {
    out.middleRows(r, p.rows()) = p.value();
    r += p.rows();
  }
  return tape_of(parts.front()).record(std::move(out), parts, [parts](Tape& t, const Matrix&, const Matrix& g) {
    Eigen::Index r0 = 0;
    for (Var p : parts) {
      if (t.requires_grad(p)) t.accumulate(p, g.middleRows(r0, p.rows()));
      r0 += p.rows();
    }
  });
}

CVar operator+(CVar a, CVar b) { return {a.re + b.re, a.im + b.im}; }

CVar operator*(CVar a, CVar b) { return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re}; }

CVar cmul(const Eigen::MatrixXcd& c, CVar a) {
  Tape& t = tape_of(a.re, a.im);
  const Var cr = t.constant(c.real());
  const Var ci = t.constant(c.imag());
  return {cr * a.re - ci * a.im, cr * a.im + ci * a.re};
}

CVar cmatmul(const Eigen::MatrixXcd& c, CVar a) {
  Tape& t = tape_of(a.re, a.im);
  const Var cr = t.constant(c.real());
  const Var ci = t.constant(c.imag());
  return {matmul(cr, a.re) - matmul(ci, a.im), matmul(cr, a.im) + matmul(ci, a.re)};
}

Var abs2(CVar a) { return square(a.re) + square(a.im); }

}  // namespace isac::nn
