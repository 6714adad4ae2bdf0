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

#include <vector>

#include "isac/rng.hpp"
#include "isac/signal.hpp"
#include "isac/tape.hpp"

namespace isac {

struct AngleRange {
  double min = 0.0;  // radians
  double max = 0.0;

  bool contains(double a) const { return a >= min && a <= max; }
  bool operator==(const AngleRange&) const = default;
};

struct ScenarioConfig {
  int num_antennas = 16;
  int modulation_size = 4;
  double energy_budget = 1.0;
  double noise_psd = 1.0;
  double radar_snr_db = 0.0;   // sigma_r^2 / N0
  double comm_snr_db = 20.0;   // sigma_c^2 / N0
  AngleRange target_range{deg2rad(-20.0), deg2rad(20.0)};
  AngleRange rx_range{deg2rad(30.0), deg2rad(50.0)};
  double target_prior = 0.5;   // Pr(t = 1)

  double radar_gain_var() const { return noise_psd * db2lin(radar_snr_db); }
  double comm_gain_var() const { return noise_psd * db2lin(comm_snr_db); }

  // Throws std::invalid_argument naming the offending field.
  void validate() const;

  bool operator==(const ScenarioConfig&) const = default;
};

// One Monte-Carlo draw. alpha is drawn even when no target is present so that
// stream consumption does not depend on t.
struct SceneSample {
  int message = 0;
  bool target_present = false;
  double target_angle = 0.0;
  double rx_angle = 0.0;
  cplx radar_gain;
  cplx comm_gain;
  ComplexVec radar_noise;
  cplx comm_noise;
};

struct CommObservation {
  cplx z;
  cplx kappa;
};

SceneSample draw_scene(Rng& rng, const ScenarioConfig& cfg);

// z_r = t * alpha * a_rx(theta) a_tx(theta)^T y + n
ComplexVec radar_forward(const ArrayGeometry& geom, const SceneSample& s, const ComplexVec& y);

// kappa = beta a_tx(vartheta)^T v, z_c = kappa x + n
CommObservation comm_forward(const ArrayGeometry& geom, const SceneSample& s, const ComplexVec& v, cplx x);

// Column-major batch of scenes with per-sample steering vectors precomputed.
struct SceneBatch {
  std::vector<int> messages;
  Eigen::RowVectorXd target_present;    // 0/1
  Eigen::RowVectorXd target_angle;
  Eigen::RowVectorXd rx_angle;
  Eigen::RowVectorXcd radar_gain;
  Eigen::RowVectorXcd comm_gain;
  Eigen::MatrixXcd radar_noise;         // K x B
  Eigen::RowVectorXcd comm_noise;
  Eigen::MatrixXcd target_steering;     // K x B, a(theta_b)
  Eigen::MatrixXcd rx_steering;         // K x B, a(vartheta_b)

  Eigen::Index size() const { return target_present.size(); }
  SceneSample sample(Eigen::Index b) const;
};

SceneBatch draw_batch(Rng& rng, const ScenarioConfig& cfg, const ArrayGeometry& geom, Eigen::Index batch_size);
SceneBatch make_batch(const std::vector<SceneSample>& scenes, const ArrayGeometry& geom);

// Batched observations for y_b = v * x_b. Radar: K x B. Comm: z and kappa rows.
Eigen::MatrixXcd radar_forward(const SceneBatch& batch, const ComplexVec& v, const Eigen::RowVectorXcd& x);
struct CommBatch {
  Eigen::RowVectorXcd z;
  Eigen::RowVectorXcd kappa;
};
CommBatch comm_forward(const SceneBatch& batch, const ComplexVec& v, const Eigen::RowVectorXcd& x);

// Differentiable versions for training. v is K x 1, x is 1 x B.
nn::CVar radar_forward(nn::Tape& tape, const SceneBatch& batch, nn::CVar v, nn::CVar x);
struct CommVars {
  nn::CVar z;
  nn::CVar kappa;
};
CommVars comm_forward(nn::Tape& tape, const SceneBatch& batch, nn::CVar v, nn::CVar x);

}  // namespace isac
