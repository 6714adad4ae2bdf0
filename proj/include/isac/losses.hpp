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

#include <span>
#include <vector>

#include "isac/tape.hpp"

namespace isac {

// Probabilities are clamped to [kProbClamp, 1 - kProbClamp] before logs.
inline constexpr double kProbClamp = 1e-12;

// Binary cross-entropy -mean[t log q + (1-t) log(1-q)]. q, t: 1 x B.
nn::Var loss_td(nn::Var q, const Eigen::RowVectorXd& t);
double loss_td(std::span<const double> q, std::span<const double> t);

// Gaussian NLL mean[log sigma + |theta - theta_hat|^2 / (2 sigma^2)] over the
// target-present subset (mask == 1). Empty subset gives 0.
nn::Var loss_tr(nn::Var theta_hat, nn::Var sigma_hat, const Eigen::RowVectorXd& theta, const Eigen::RowVectorXd& mask);
double loss_tr(std::span<const double> theta_hat, std::span<const double> sigma_hat, std::span<const double> theta,
               std::span<const double> mask);

// mean |theta_hat - theta|^2 over the target-present subset.
nn::Var loss_mse(nn::Var theta_hat, const Eigen::RowVectorXd& theta, const Eigen::RowVectorXd& mask);

// Categorical cross-entropy -mean[log m_hat(m)]. m_hat: M x B probabilities.
nn::Var loss_cce(nn::Var m_hat, const std::vector<int>& messages);
double loss_cce(const Eigen::MatrixXd& m_hat, const std::vector<int>& messages);

// omega * radar + (1 - omega) * comm
double loss_isac(double radar, double comm, double omega_r);
nn::Var loss_isac(nn::Var radar, nn::Var comm, double omega_r);

}  // namespace isac
