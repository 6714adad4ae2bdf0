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

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "isac/rng.hpp"
#include "isac/tape.hpp"

namespace isac::nn {

enum class Activation {
  Linear,
  Sigmoid,
  ScaledTanh,  // (pi/2) tanh(x), range (-pi/2, pi/2)
  ReluFloor,      // relu(x) + kSigmaFloor
  SoftplusFloor,  // softplus(x) + kSigmaFloor
  Softmax,
};

inline constexpr double kSigmaFloor = 1e-4;

std::string to_string(Activation a);

// Fully connected network with ReLU hidden layers. weights[l] is
// dims[l+1] x dims[l]; biases[l] is dims[l+1] x 1.
struct Mlp {
  std::vector<int> dims;
  std::vector<Matrix> weights;
  std::vector<Matrix> biases;
  Activation output = Activation::Linear;

  // Glorot-uniform weights, zero biases.
  static Mlp init(Rng& rng, std::vector<int> dims, Activation output);

  std::size_t num_layers() const { return weights.size(); }
  std::size_t parameter_count() const;
  int input_dim() const { return dims.front(); }
  int output_dim() const { return dims.back(); }

  // Batched evaluation, one sample per column.
  Matrix forward(const Matrix& input) const;
  Eigen::VectorXd forward(const Eigen::VectorXd& input) const;

  // Parameter tensors in (w0, b0, w1, b1, ...) order.
  std::vector<Matrix*> tensors();
  std::vector<const Matrix*> tensors() const;

  bool operator==(const Mlp&) const = default;
};

Matrix apply_activation(Activation a, const Matrix& pre);

// Parameters of one Mlp as tape nodes.
struct BoundMlp {
  const Mlp* net = nullptr;
  std::vector<Var> weights;
  std::vector<Var> biases;
  bool trainable = false;

  // Gradients in tensors() order; requires a finalized tape.
  std::vector<Matrix> grads() const;
};

// Trainable nets record parameter nodes; frozen nets record constants, so no
// gradient is accumulated for them.
BoundMlp bind(Tape& tape, const Mlp& net, bool trainable);
Var forward(const BoundMlp& net, Var input);
Var activate(Activation a, Var pre);

// Network container serialization. Layout (little-endian):
//   "ISACAE01", then per network: u32 layer count L, L+1 u32 dims,
//   then per layer the row-major f64 weights followed by the f64 biases.
void write_networks(std::ostream& out, std::span<const Mlp> nets);
// Output activations are not stored; the caller supplies them in order.
std::vector<Mlp> read_networks(std::istream& in, std::span<const Activation> activations);

inline constexpr char kCheckpointMagic[] = "ISACAE01";

}  // namespace isac::nn
