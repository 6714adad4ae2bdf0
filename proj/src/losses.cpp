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

#include "isac/losses.hpp"

#include <stdexcept>

namespace isac {
namespace {

Eigen::RowVectorXd row(std::span<const double> v) {
  return Eigen::Map<const Eigen::RowVectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

void check_omega(double omega_r) {
  if (!(omega_r >= 0.0 && omega_r <= 1.0)) throw std::invalid_argument("loss_isac: omega_r must lie in [0, 1]");
}

}  // namespace

nn::Var loss_td(nn::Var q, const Eigen::RowVectorXd& t) {
  if (q.rows() != 1 || q.cols() != t.size()) throw std::invalid_argument("loss_td: shape mismatch");
  nn::Tape& tape = *q.tape;
  const nn::Var qc = nn::clamp(q, kProbClamp, 1.0 - kProbClamp);
  const nn::Var tv = tape.constant(t);
  const nn::Var not_t = tape.constant((1.0 - t.array()).matrix());
  const nn::Var ll = tv * nn::log(qc) + not_t * nn::log(1.0 + (-1.0 * qc));
  return -1.0 * nn::mean(ll);
}

double loss_td(std::span<const double> q, std::span<const double> t) {
  nn::Tape tape;
  return loss_td(tape.constant(row(q)), row(t)).value()(0, 0);
}

nn::Var loss_tr(nn::Var theta_hat, nn::Var sigma_hat, const Eigen::RowVectorXd& theta, const Eigen::RowVectorXd& mask) {
  if (theta_hat.cols() != theta.size() || sigma_hat.cols() != theta.size() || mask.size() != theta.size())
    throw std::invalid_argument("loss_tr: shape mismatch");
  nn::Tape& tape = *theta_hat.tape;
  const double count = mask.sum();
  if (count == 0.0) return tape.constant(0.0);
  const nn::Var err = theta_hat - tape.constant(theta);
  const nn::Var per = nn::log(sigma_hat) + 0.5 * (nn::square(err) / nn::square(sigma_hat));
  return (1.0 / count) * nn::sum(per * tape.constant(mask));
}

double loss_tr(std::span<const double> theta_hat, std::span<const double> sigma_hat, std::span<const double> theta,
               std::span<const double> mask) {
  nn::Tape tape;
  return loss_tr(tape.constant(row(theta_hat)), tape.constant(row(sigma_hat)), row(theta), row(mask)).value()(0, 0);
}

nn::Var loss_mse(nn::Var theta_hat, const Eigen::RowVectorXd& theta, const Eigen::RowVectorXd& mask) {
  if (theta_hat.cols() != theta.size() || mask.size() != theta.size())
    throw std::invalid_argument("loss_mse: shape mismatch");
  nn::Tape& tape = *theta_hat.tape;
  const double count = mask.sum();
  if (count == 0.0) return tape.constant(0.0);
  const nn::Var err = theta_hat - tape.constant(theta);
  return (1.0 / count) * nn::sum(nn::square(err) * tape.constant(mask));
}

nn::Var loss_cce(nn::Var m_hat, const std::vector<int>& messages) {
  const auto B = static_cast<Eigen::Index>(messages.size());
  if (m_hat.cols() != B || B == 0) throw std::invalid_argument("loss_cce: shape mismatch");
  nn::Matrix onehot = nn::Matrix::Zero(m_hat.rows(), B);
  for (Eigen::Index b = 0; b < B; ++b) {
    const int m = messages[static_cast<std::size_t>(b)];
    if (m < 0 || m >= m_hat.rows()) throw std::out_of_range("loss_cce: message index out of range");
    onehot(m, b) = 1.0;
  }
  nn::Tape& tape = *m_hat.tape;
  const nn::Var lp = nn::log(nn::clamp(m_hat, kProbClamp, 1.0 - kProbClamp));
  return (-1.0 / static_cast<double>(B)) * nn::sum(lp * tape.constant(onehot));
}

double loss_cce(const Eigen::MatrixXd& m_hat, const std::vector<int>& messages) {
  nn::Tape tape;
  return loss_cce(tape.constant(m_hat), messages).value()(0, 0);
}

double loss_isac(double radar, double comm, double omega_r) {
  check_omega(omega_r);
  return omega_r * radar + (1.0 - omega_r) * comm;
}

nn::Var loss_isac(nn::Var radar, nn::Var comm, double omega_r) {
  check_omega(omega_r);
  return omega_r * radar + (1.0 - omega_r) * comm;
}

}  // namespace isac
