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

#include <array>
#include <filesystem>
#include <vector>

#include "isac/channels.hpp"
#include "isac/mlp.hpp"

namespace isac {

// Fixed network order used for checkpoints.
enum class NetId { Encoder = 0, Beamformer, Presence, Angle, Uncertainty, CommRx };
inline constexpr std::size_t kNumNets = 6;

// The six networks of the autoencoder plus the angular prior fed to the
// beamformer. Complex values cross network boundaries as (re, im) stacks.
struct IsacModel {
  int num_antennas = 16;
  int modulation_size = 4;
  double energy_budget = 1.0;
  // [theta_min, theta_max, vartheta_min, vartheta_max], radians
  std::array<double, 4> angular_prior{};
  std::array<nn::Mlp, kNumNets> nets;

  static IsacModel init(Rng& rng, const ScenarioConfig& cfg);

  nn::Mlp& net(NetId id) { return nets[static_cast<std::size_t>(id)]; }
  const nn::Mlp& net(NetId id) const { return nets[static_cast<std::size_t>(id)]; }

  // Beamformer input: the angular prior scaled to [-1, 1].
  Eigen::VectorXd beamformer_input() const;

  bool operator==(const IsacModel&) const = default;
};

// Layer dims per network: encoder/beamformer hidden (K, K, 2K), radar receivers
// (2K, 2K, K), comm receiver (K, 2K, 2K).
std::array<std::vector<int>, kNumNets> network_dims(int num_antennas, int modulation_size);
std::array<nn::Activation, kNumNets> network_activations();

// Unit average-energy constellation, one entry per message.
Eigen::RowVectorXcd constellation(const IsacModel& model);
// Beamformer scaled to ||v||^2 = energy_budget.
ComplexVec beamformer(const IsacModel& model);

struct Transmission {
  cplx x;
  ComplexVec v;
  ComplexVec y;  // v * x
};
Transmission transmit(const IsacModel& model, int message);

struct RadarEstimates {
  Eigen::RowVectorXd presence;   // q
  Eigen::RowVectorXd angle;      // theta_hat
  Eigen::RowVectorXd sigma;      // sigma_hat
};
RadarEstimates radar_receive(const IsacModel& model, const Eigen::MatrixXcd& z_r);
// Message probabilities, modulation_size x B.
Eigen::MatrixXd comm_receive(const IsacModel& model, const Eigen::RowVectorXcd& z, const Eigen::RowVectorXcd& kappa);

// Stack complex rows/columns as [re; im].
Eigen::MatrixXd stack_re_im(const Eigen::MatrixXcd& z);

void save_model(const IsacModel& model, const std::filesystem::path& path);
// The checkpoint holds weights only; scenario fields come from cfg.
IsacModel load_model(const std::filesystem::path& path, const ScenarioConfig& cfg);

// Tape view of a model. Frozen networks are bound as constants.
struct BoundModel {
  std::array<nn::BoundMlp, kNumNets> nets;
  const IsacModel* model = nullptr;

  const nn::BoundMlp& net(NetId id) const { return nets[static_cast<std::size_t>(id)]; }
};
BoundModel bind(nn::Tape& tape, const IsacModel& model, const std::array<bool, kNumNets>& trainable);

struct TransmitVars {
  nn::CVar constellation;  // 1 x M
  nn::CVar v;              // K x 1
};
TransmitVars transmit(nn::Tape& tape, const BoundModel& model);

}  // namespace isac
