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

#include <cstdint>
#include <span>
#include <vector>

#include "isac/tape.hpp"

namespace isac::nn {

struct AdamConfig {
  double learning_rate = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Moment accumulators for one parameter set.
class AdamState {
 public:
  AdamState() = default;
  AdamState(AdamConfig config, std::span<const Matrix* const> params);

  const AdamConfig& config() const { return config_; }
  std::int64_t step() const { return step_; }

  // Bias-corrected update, params -= lr * m_hat / (sqrt(v_hat) + eps).
  void update(std::span<Matrix* const> params, std::span<const Matrix> grads);

 private:
  AdamConfig config_;
  std::int64_t step_ = 0;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
};

}  // namespace isac::nn
