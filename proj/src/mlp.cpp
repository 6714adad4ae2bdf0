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

#include "isac/mlp.hpp"

#include <bit>
#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace isac::nn {

std::string to_string(Activation a) {
  switch (a) {
    case Activation::Linear: return "linear";
    case Activation::Sigmoid: return "sigmoid";
    case Activation::ScaledTanh: return "scaled-tanh";
    case Activation::ReluFloor: return "relu-floor";
    case Activation::SoftplusFloor: return "softplus-floor";
    case Activation::Softmax: return "softmax";
  }
  return "unknown";
}

Mlp Mlp::init(Rng& rng, std::vector<int> dims, Activation output) {
  if (dims.size() < 2) throw std::invalid_argument("Mlp::init: need at least input and output dims");
  for (int d : dims)
    if (d <= 0) throw std::invalid_argument("Mlp::init: dims must be positive");
  Mlp net;
  net.dims = std::move(dims);
  net.output = output;
  for (std::size_t l = 0; l + 1 < net.dims.size(); ++l) {
    const int fan_in = net.dims[l];
    const int fan_out = net.dims[l + 1];
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    Matrix w(fan_out, fan_in);
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = rng.uniform(-limit, limit);
    net.weights.push_back(std::move(w));
    net.biases.push_back(Matrix::Zero(fan_out, 1));
  }
  return net;
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights.size(); ++l)
    n += static_cast<std::size_t>(weights[l].size() + biases[l].size());
  return n;
}

Matrix apply_activation(Activation a, const Matrix& pre) {
  switch (a) {
    case Activation::Linear: return pre;
    case Activation::Sigmoid:
      return pre.unaryExpr([](double x) {
        if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
        const double e = std::exp(x);
        return e / (1.0 + e);
      });
    case Activation::ScaledTanh: return (std::numbers::pi / 2.0) * pre.array().tanh().matrix();
    case Activation::ReluFloor: return (pre.cwiseMax(0.0).array() + kSigmaFloor).matrix();
    case Activation::SoftplusFloor:
      return pre.unaryExpr([](double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))) + kSigmaFloor; });
    case Activation::Softmax: {
      Matrix out = pre;
      for (Eigen::Index c = 0; c < out.cols(); ++c) {
        auto col = out.col(c);
        col.array() -= col.maxCoeff();
        col = col.array().exp().matrix();
        col /= col.sum();
      }
      return out;
    }
  }
  throw std::logic_error("apply_activation: unknown activation");
}

Matrix Mlp::forward(const Matrix& input) const {
  if (input.rows() != dims.front())
    throw std::invalid_argument("Mlp::forward: input has " + std::to_string(input.rows()) + " rows, expected " +
                                std::to_string(dims.front()));
  Matrix h = input;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    Matrix pre = weights[l] * h;
    pre.colwise() += biases[l].col(0);
    h = (l + 1 < weights.size()) ? Matrix(pre.cwiseMax(0.0)) : apply_activation(output, pre);
  }
  return h;
}

Eigen::VectorXd Mlp::forward(const Eigen::VectorXd& input) const { return forward(Matrix(input)).col(0); }

std::vector<Matrix*> Mlp::tensors() {
  std::vector<Matrix*> out;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    out.push_back(&weights[l]);
    out.push_back(&biases[l]);
  }
  return out;
}

std::vector<const Matrix*> Mlp::tensors() const {
  std::vector<const Matrix*> out;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    out.push_back(&weights[l]);
    out.push_back(&biases[l]);
  }
  return out;
}

std::vector<Matrix> BoundMlp::grads() const {
  std::vector<Matrix> out;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    out.push_back(weights[l].tape->grad(weights[l]));
    out.push_back(biases[l].tape->grad(biases[l]));
  }
  return out;
}

BoundMlp bind(Tape& tape, const Mlp& net, bool trainable) {
  BoundMlp b;
  b.net = &net;
  b.trainable = trainable;
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    b.weights.push_back(trainable ? tape.parameter(net.weights[l]) : tape.constant(net.weights[l]));
    b.biases.push_back(trainable ? tape.parameter(net.biases[l]) : tape.constant(net.biases[l]));
  }
  return b;
}

Var activate(Activation a, Var pre) {
  switch (a) {
    case Activation::Linear: return pre;
    case Activation::Sigmoid: return sigmoid(pre);
    case Activation::ScaledTanh: return (std::numbers::pi / 2.0) * tanh(pre);
    case Activation::ReluFloor: return relu(pre) + kSigmaFloor;
    case Activation::SoftplusFloor: return softplus(pre) + kSigmaFloor;
    case Activation::Softmax: return softmax(pre);
  }
  throw std::logic_error("activate: unknown activation");
}

Var forward(const BoundMlp& net, Var input) {
  if (input.rows() != net.net->dims.front()) throw std::invalid_argument("forward: input dimension mismatch");
  Var h = input;
  const std::size_t L = net.weights.size();
  for (std::size_t l = 0; l < L; ++l) {
    Var pre = linear(net.weights[l], h, net.biases[l]);
    h = (l + 1 < L) ? relu(pre) : activate(net.net->output, pre);
  }
  return h;
}

namespace {

void put_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 4);
}

void put_f64(std::ostream& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw std::runtime_error("checkpoint: truncated file");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

double get_f64(std::istream& in) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8)) throw std::runtime_error("checkpoint: truncated file");
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

}  // namespace

void write_networks(std::ostream& out, std::span<const Mlp> nets) {
  out.write(kCheckpointMagic, 8);
  for (const Mlp& net : nets) {
    put_u32(out, static_cast<std::uint32_t>(net.num_layers()));
    for (int d : net.dims) put_u32(out, static_cast<std::uint32_t>(d));
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
      const Matrix& w = net.weights[l];
      for (Eigen::Index r = 0; r < w.rows(); ++r)
        for (Eigen::Index c = 0; c < w.cols(); ++c) put_f64(out, w(r, c));
      for (Eigen::Index r = 0; r < net.biases[l].rows(); ++r) put_f64(out, net.biases[l](r, 0));
    }
  }
  if (!out) throw std::runtime_error("checkpoint: write failed");
}

std::vector<Mlp> read_networks(std::istream& in, std::span<const Activation> activations) {
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kCheckpointMagic, 8) != 0)
    throw std::runtime_error("checkpoint: bad magic");
  std::vector<Mlp> nets;
  for (Activation act : activations) {
    Mlp net;
    net.output = act;
    const std::uint32_t L = get_u32(in);
    if (L == 0 || L > 64) throw std::runtime_error("checkpoint: implausible layer count");
    for (std::uint32_t i = 0; i <= L; ++i) {
      const std::uint32_t d = get_u32(in);
      if (d == 0 || d > (1u << 20)) throw std::runtime_error("checkpoint: implausible layer dim");
      net.dims.push_back(static_cast<int>(d));
    }
    for (std::uint32_t l = 0; l < L; ++l) {
      Matrix w(net.dims[l + 1], net.dims[l]);
      for (Eigen::Index r = 0; r < w.rows(); ++r)
        for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = get_f64(in);
      Matrix b(net.dims[l + 1], 1);
      for (Eigen::Index r = 0; r < b.rows(); ++r) b(r, 0) = get_f64(in);
      net.weights.push_back(std::move(w));
      net.biases.push_back(std::move(b));
    }
    nets.push_back(std::move(net));
  }
  if (in.peek() != std::char_traits<char>::eof()) throw std::runtime_error("checkpoint: trailing bytes");
  return nets;
}

}  // namespace isac::nn
