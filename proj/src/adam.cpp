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

#include "isac/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace isac::nn {

AdamState::AdamState(AdamConfig config, std::span<const Matrix* const> params) : config_(config) {
  for (const Matrix* p : params) {
    m_.push_back(Matrix::Zero(p->rows(), p->cols()));
    v_.push_back(Matrix::Zero(p->rows(), p->cols()));
  }
}

void AdamState::update(std::span<Matrix* const> params, std::span<const Matrix> grads) {
  if (params.size() != m_.size() || grads.size() != m_.size())
    throw std::invalid_argument("AdamState::update: tensor count mismatch");
  for (std::size_t i = 0; i < m_.size(); ++i) {
    if (params[i]->rows() != m_[i].rows() || params[i]->cols() != m_[i].cols() ||
        grads[i].rows() != m_[i].rows() || grads[i].cols() != m_[i].cols())
      throw std::invalid_argument("AdamState::update: shape mismatch at tensor " + std::to_string(i));
  }
  ++step_;
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(step_));
  for (std::size_t i = 0; i < m_.size(); ++i) {
    m_[i] = b1 * m_[i] + (1.0 - b1) * grads[i];
    v_[i] = b2 * v_[i] + (1.0 - b2) * grads[i].cwiseAbs2();
    params[i]->array() -=
        config_.learning_rate * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + config_.epsilon);
  }
}

}  // namespace isac::nn
