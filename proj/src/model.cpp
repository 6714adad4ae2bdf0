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

#include "isac/model.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <stdexcept>

namespace isac {

std::array<std::vector<int>, kNumNets> network_dims(int K, int M) {
  return {{
      {M, K, K, 2 * K, 2},              // encoder
      {4, K, K, 2 * K, 2 * K},          // beamformer
      {2 * K, 2 * K, 2 * K, K, 1},      // presence
      {2 * K, 2 * K, 2 * K, K, 1},      // angle
      {2 * K, 2 * K, 2 * K, K, 1},      // uncertainty
      {4, K, 2 * K, 2 * K, M},          // comm receiver: (z, kappa)
  }};
}

std::array<nn::Activation, kNumNets> network_activations() {
  using nn::Activation;
  return {Activation::Linear,     Activation::Linear,    Activation::Sigmoid,
          Activation::ScaledTanh, Activation::SoftplusFloor, Activation::Softmax};
}

IsacModel IsacModel::init(Rng& rng, const ScenarioConfig& cfg) {
  cfg.validate();
  IsacModel m;
  m.num_antennas = cfg.num_antennas;
  m.modulation_size = cfg.modulation_size;
  m.energy_budget = cfg.energy_budget;
  m.angular_prior = {cfg.target_range.min, cfg.target_range.max, cfg.rx_range.min, cfg.rx_range.max};
  const auto dims = network_dims(cfg.num_antennas, cfg.modulation_size);
  const auto acts = network_activations();
  for (std::size_t i = 0; i < kNumNets; ++i) {
    Rng net_rng = rng.derive("net", i);
    m.nets[i] = nn::Mlp::init(net_rng, dims[i], acts[i]);
  }
  return m;
}

Eigen::VectorXd IsacModel::beamformer_input() const {
  Eigen::VectorXd in(4);
  for (int i = 0; i < 4; ++i) in[i] = angular_prior[static_cast<std::size_t>(i)] / (std::numbers::pi / 2.0);
  return in;
}

Eigen::RowVectorXcd constellation(const IsacModel& model) {
  const nn::Matrix raw = model.net(NetId::Encoder).forward(nn::Matrix(nn::Matrix::Identity(model.modulation_size, model.modulation_size)));
  Eigen::RowVectorXcd x(model.modulation_size);
  for (int m = 0; m < model.modulation_size; ++m) x[m] = cplx(raw(0, m), raw(1, m));
  const double energy = x.cwiseAbs2().mean();
  if (!(energy > 0.0)) throw std::runtime_error("constellation: zero energy encoder output");
  return x / std::sqrt(energy);
}

ComplexVec beamformer(const IsacModel& model) {
  const Eigen::VectorXd raw = model.net(NetId::Beamformer).forward(model.beamformer_input());
  const int K = model.num_antennas;
  ComplexVec v(K);
  for (int k = 0; k < K; ++k) v[k] = cplx(raw[k], raw[K + k]);
  const double norm = v.norm();
  if (!(norm > 0.0)) throw std::runtime_error("beamformer: zero output");
  return v * (std::sqrt(model.energy_budget) / norm);
}

Transmission transmit(const IsacModel& model, int message) {
  if (message < 0 || message >= model.modulation_size) throw std::out_of_range("transmit: message out of range");
  Transmission t;
  t.x = constellation(model)[message];
  t.v = beamformer(model);
  t.y = t.v * t.x;
  return t;
}

Eigen::MatrixXd stack_re_im(const Eigen::MatrixXcd& z) {
  Eigen::MatrixXd out(2 * z.rows(), z.cols());
  out.topRows(z.rows()) = z.real();
  out.bottomRows(z.rows()) = z.imag();
  return out;
}

RadarEstimates radar_receive(const IsacModel& model, const Eigen::MatrixXcd& z_r) {
  const nn::Matrix in = stack_re_im(z_r);
  return {model.net(NetId::Presence).forward(in).row(0), model.net(NetId::Angle).forward(in).row(0),
          model.net(NetId::Uncertainty).forward(in).row(0)};
}

Eigen::MatrixXd comm_receive(const IsacModel& model, const Eigen::RowVectorXcd& z, const Eigen::RowVectorXcd& kappa) {
  if (z.size() != kappa.size()) throw std::invalid_argument("comm_receive: z/kappa length mismatch");
  nn::Matrix in(4, z.size());
  in.row(0) = z.real();
  in.row(1) = z.imag();
  in.row(2) = kappa.real();
  in.row(3) = kappa.imag();
  return model.net(NetId::CommRx).forward(in);
}

void save_model(const IsacModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("save_model: cannot open " + path.string());
  nn::write_networks(out, std::span<const nn::Mlp>(model.nets.data(), model.nets.size()));
}

IsacModel load_model(const std::filesystem::path& path, const ScenarioConfig& cfg) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_model: file not found: " + path.string());
  const auto acts = network_activations();
  std::vector<nn::Mlp> nets = nn::read_networks(in, acts);
  IsacModel m;
  m.num_antennas = cfg.num_antennas;
  m.modulation_size = cfg.modulation_size;
  m.energy_budget = cfg.energy_budget;
  m.angular_prior = {cfg.target_range.min, cfg.target_range.max, cfg.rx_range.min, cfg.rx_range.max};
  const auto dims = network_dims(cfg.num_antennas, cfg.modulation_size);
  for (std::size_t i = 0; i < kNumNets; ++i) {
    if (nets[i].dims != dims[i])
      throw std::runtime_error("load_model: network " + std::to_string(i) + " dims do not match the scenario");
    m.nets[i] = std::move(nets[i]);
  }
  return m;
}

BoundModel bind(nn::Tape& tape, const IsacModel& model, const std::array<bool, kNumNets>& trainable) {
  BoundModel b;
  b.model = &model;
  for (std::size_t i = 0; i < kNumNets; ++i) b.nets[i] = nn::bind(tape, model.nets[i], trainable[i]);
  return b;
}

TransmitVars transmit(nn::Tape& tape, const BoundModel& bm) {
  const IsacModel& model = *bm.model;
  const int M = model.modulation_size;
  const int K = model.num_antennas;

  const nn::Var raw_x = nn::forward(bm.net(NetId::Encoder), tape.constant(nn::Matrix::Identity(M, M)));
  const nn::CVar x_raw{nn::slice_rows(raw_x, 0, 1), nn::slice_rows(raw_x, 1, 1)};
  const nn::Var x_scale = 1.0 / nn::sqrt(nn::mean(nn::abs2(x_raw)));
  const nn::Var xs = nn::broadcast(x_scale, 1, M);

  const nn::Var raw_v = nn::forward(bm.net(NetId::Beamformer), tape.constant(model.beamformer_input()));
  const nn::CVar v_raw{nn::slice_rows(raw_v, 0, K), nn::slice_rows(raw_v, K, K)};
  const nn::Var v_scale = std::sqrt(model.energy_budget) / nn::sqrt(nn::sum(nn::abs2(v_raw)));
  const nn::Var vs = nn::broadcast(v_scale, K, 1);

  return {{x_raw.re * xs, x_raw.im * xs}, {v_raw.re * vs, v_raw.im * vs}};
}

}  // namespace isac
