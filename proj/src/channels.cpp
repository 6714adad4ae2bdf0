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

#include "isac/channels.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace isac {
namespace {

void check_range(const AngleRange& r, const char* name) {
  constexpr double half_pi = std::numbers::pi / 2.0;
  if (!(r.min >= -half_pi - 1e-12 && r.min <= r.max && r.max <= half_pi + 1e-12))
    throw std::invalid_argument(std::string("ScenarioConfig: ") + name + " must satisfy -pi/2 <= min <= max <= pi/2");
}

nn::CVar constant(nn::Tape& tape, const Eigen::MatrixXcd& c) {
  return {tape.constant(c.real()), tape.constant(c.imag())};
}

}  // namespace

void ScenarioConfig::validate() const {
  if (num_antennas < 1) throw std::invalid_argument("ScenarioConfig: num_antennas must be positive");
  if (modulation_size < 2) throw std::invalid_argument("ScenarioConfig: modulation_size must be >= 2");
  if (!(energy_budget > 0.0)) throw std::invalid_argument("ScenarioConfig: energy_budget must be positive");
  if (!(noise_psd > 0.0)) throw std::invalid_argument("ScenarioConfig: noise_psd must be positive");
  if (!std::isfinite(radar_snr_db)) throw std::invalid_argument("ScenarioConfig: radar_snr_db must be finite");
  if (!std::isfinite(comm_snr_db)) throw std::invalid_argument("ScenarioConfig: comm_snr_db must be finite");
  check_range(target_range, "target_range");
  check_range(rx_range, "rx_range");
  if (!(target_prior >= 0.0 && target_prior <= 1.0))
    throw std::invalid_argument("ScenarioConfig: target_prior must lie in [0, 1]");
}

SceneSample draw_scene(Rng& rng, const ScenarioConfig& cfg) {
  SceneSample s;
  s.message = rng.uniform_int(0, cfg.modulation_size - 1);
  s.target_present = rng.bernoulli(cfg.target_prior);
  s.target_angle = rng.uniform(cfg.target_range.min, cfg.target_range.max);
  s.rx_angle = rng.uniform(cfg.rx_range.min, cfg.rx_range.max);
  s.radar_gain = sample_cn(rng, cfg.radar_gain_var());
  s.comm_gain = sample_cn(rng, cfg.comm_gain_var());
  s.radar_noise = sample_cn(rng, cfg.noise_psd, static_cast<std::size_t>(cfg.num_antennas));
  s.comm_noise = sample_cn(rng, cfg.noise_psd);
  return s;
}

ComplexVec radar_forward(const ArrayGeometry& geom, const SceneSample& s, const ComplexVec& y) {
  if (y.size() != geom.num_elements() || s.radar_noise.size() != geom.num_elements())
    throw std::invalid_argument("radar_forward: dimension mismatch");
  if (!s.target_present) return s.radar_noise;
  const ComplexVec a = steering_vector(geom, s.target_angle);
  const cplx gain = s.radar_gain * (a.transpose() * y)(0);
  return gain * a + s.radar_noise;
}

CommObservation comm_forward(const ArrayGeometry& geom, const SceneSample& s, const ComplexVec& v, cplx x) {
  if (v.size() != geom.num_elements()) throw std::invalid_argument("comm_forward: dimension mismatch");
  const cplx kappa = s.comm_gain * (steering_vector(geom, s.rx_angle).transpose() * v)(0);
  return {kappa * x + s.comm_noise, kappa};
}

SceneSample SceneBatch::sample(Eigen::Index b) const {
  SceneSample s;
  s.message = messages.at(static_cast<std::size_t>(b));
  s.target_present = target_present(b) != 0.0;
  s.target_angle = target_angle(b);
  s.rx_angle = rx_angle(b);
  s.radar_gain = radar_gain(b);
  s.comm_gain = comm_gain(b);
  s.radar_noise = radar_noise.col(b);
  s.comm_noise = comm_noise(b);
  return s;
}

SceneBatch make_batch(const std::vector<SceneSample>& scenes, const ArrayGeometry& geom) {
  const auto B = static_cast<Eigen::Index>(scenes.size());
  const int K = geom.num_elements();
  SceneBatch out;
  out.messages.resize(scenes.size());
  out.target_present.resize(B);
  out.target_angle.resize(B);
  out.rx_angle.resize(B);
  out.radar_gain.resize(B);
  out.comm_gain.resize(B);
  out.radar_noise.resize(K, B);
  out.comm_noise.resize(B);
  out.target_steering.resize(K, B);
  out.rx_steering.resize(K, B);
  for (Eigen::Index b = 0; b < B; ++b) {
    const SceneSample& s = scenes[static_cast<std::size_t>(b)];
    if (s.radar_noise.size() != K) throw std::invalid_argument("make_batch: noise length != num_elements");
    out.messages[static_cast<std::size_t>(b)] = s.message;
    out.target_present(b) = s.target_present ? 1.0 : 0.0;
    out.target_angle(b) = s.target_angle;
    out.rx_angle(b) = s.rx_angle;
    out.radar_gain(b) = s.radar_gain;
    out.comm_gain(b) = s.comm_gain;
    out.radar_noise.col(b) = s.radar_noise;
    out.comm_noise(b) = s.comm_noise;
    out.target_steering.col(b) = steering_vector(geom, s.target_angle);
    out.rx_steering.col(b) = steering_vector(geom, s.rx_angle);
  }
  return out;
}

SceneBatch draw_batch(Rng& rng, const ScenarioConfig& cfg, const ArrayGeometry& geom, Eigen::Index batch_size) {
  if (geom.num_elements() != cfg.num_antennas) throw std::invalid_argument("draw_batch: geometry/config K mismatch");
  std::vector<SceneSample> scenes;
  scenes.reserve(static_cast<std::size_t>(batch_size));
  for (Eigen::Index b = 0; b < batch_size; ++b) scenes.push_back(draw_scene(rng, cfg));
  return make_batch(scenes, geom);
}

Eigen::MatrixXcd radar_forward(const SceneBatch& batch, const ComplexVec& v, const Eigen::RowVectorXcd& x) {
  if (v.size() != batch.target_steering.rows() || x.size() != batch.size())
    throw std::invalid_argument("radar_forward: dimension mismatch");
  // a^T(theta_b) v for each column b
  const Eigen::RowVectorXcd g = v.transpose() * batch.target_steering;
  const Eigen::RowVectorXcd s =
      batch.radar_gain.cwiseProduct(g).cwiseProduct(x).cwiseProduct(batch.target_present.cast<cplx>());
  Eigen::MatrixXcd z = batch.radar_noise;
  for (Eigen::Index b = 0; b < batch.size(); ++b)
    if (s(b) != cplx(0.0)) z.col(b) += s(b) * batch.target_steering.col(b);
  return z;
}

CommBatch comm_forward(const SceneBatch& batch, const ComplexVec& v, const Eigen::RowVectorXcd& x) {
  if (v.size() != batch.rx_steering.rows() || x.size() != batch.size())
    throw std::invalid_argument("comm_forward: dimension mismatch");
  CommBatch out;
  out.kappa = batch.comm_gain.cwiseProduct(v.transpose() * batch.rx_steering);
  out.z = out.kappa.cwiseProduct(x) + batch.comm_noise;
  return out;
}

nn::CVar radar_forward(nn::Tape& tape, const SceneBatch& batch, nn::CVar v, nn::CVar x) {
  const Eigen::Index B = batch.size();
  const Eigen::Index K = batch.target_steering.rows();
  if (v.re.rows() != K || v.re.cols() != 1 || x.re.rows() != 1 || x.re.cols() != B)
    throw std::invalid_argument("radar_forward: dimension mismatch");
  // g_b = a^T(theta_b) v  (B x 1), transposed to a row
  const nn::CVar g_col = nn::cmatmul(batch.target_steering.transpose(), v);
  const nn::CVar g{nn::transpose(g_col.re), nn::transpose(g_col.im)};
  const Eigen::RowVectorXcd gain = batch.radar_gain.cwiseProduct(batch.target_present.cast<cplx>());
  const nn::CVar s = nn::cmul(gain, g * x);
  const nn::CVar echo =
      nn::cmul(batch.target_steering, {nn::broadcast_rows(s.re, K), nn::broadcast_rows(s.im, K)});
  return echo + constant(tape, batch.radar_noise);
}

CommVars comm_forward(nn::Tape& tape, const SceneBatch& batch, nn::CVar v, nn::CVar x) {
  const Eigen::Index B = batch.size();
  const Eigen::Index K = batch.rx_steering.rows();
  if (v.re.rows() != K || v.re.cols() != 1 || x.re.rows() != 1 || x.re.cols() != B)
    throw std::invalid_argument("comm_forward: dimension mismatch");
  const nn::CVar g_col = nn::cmatmul(batch.rx_steering.transpose(), v);
  const nn::CVar g{nn::transpose(g_col.re), nn::transpose(g_col.im)};
  const nn::CVar kappa = nn::cmul(batch.comm_gain, g);
  return {kappa * x + constant(tape, batch.comm_noise), kappa};
}

}  // namespace isac
