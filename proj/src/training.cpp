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

#include "isac/training.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

#include "isac/adam.hpp"
#include "isac/losses.hpp"

namespace isac {

void TrainingPlan::validate() const {
  if (!(omega_r >= 0.0 && omega_r <= 1.0)) throw std::invalid_argument("TrainingPlan: omega_r must lie in [0, 1]");
  if (batch_size < 1) throw std::invalid_argument("TrainingPlan: batch_size must be positive");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("TrainingPlan: learning_rate must be positive");
  if (total_samples < 1) throw std::invalid_argument("TrainingPlan: total_samples must be positive");
  double s = 0.0;
  for (double f : stage_fractions) {
    if (!(f >= 0.0)) throw std::invalid_argument("TrainingPlan: stage fractions must be nonnegative");
    s += f;
  }
  if (std::abs(s - 1.0) > 1e-9) throw std::invalid_argument("TrainingPlan: stage fractions must sum to 1");
}

int TrainingPlan::stage_batches(int stage) const {
  const double n = static_cast<double>(total_samples) * stage_fractions.at(static_cast<std::size_t>(stage)) /
                   static_cast<double>(batch_size);
  return static_cast<int>(std::lround(n));
}

int TrainingPlan::total_batches() const { return stage_batches(0) + stage_batches(1) + stage_batches(2); }

std::array<bool, kNumNets> stage_trainable(int stage) {
  // encoder, beamformer, presence, angle, uncertainty, comm
  switch (stage) {
    case 1: return {true, true, false, true, false, true};
    case 2: return {true, true, false, false, true, true};
    case 3: return {true, true, true, false, false, true};
  }
  throw std::invalid_argument("stage_trainable: stage must be 1, 2 or 3");
}

RadarObjective stage_objective(int stage) {
  switch (stage) {
    case 1: return RadarObjective::AngleMse;
    case 2: return RadarObjective::AngleNll;
    case 3: return RadarObjective::Detection;
  }
  throw std::invalid_argument("stage_objective: stage must be 1, 2 or 3");
}

LossTerms build_loss(nn::Tape& tape, const BoundModel& model, const SceneBatch& batch, double target_prior,
                     RadarObjective objective, double omega_r) {
  const IsacModel& m = *model.model;
  const Eigen::Index B = batch.size();
  const int M = m.modulation_size;

  const TransmitVars tx = transmit(tape, model);

  // Per-sample symbol x_b = constellation[m_b] as a 1 x M by M x B selection.
  nn::Matrix select = nn::Matrix::Zero(M, B);
  for (Eigen::Index b = 0; b < B; ++b) select(batch.messages[static_cast<std::size_t>(b)], b) = 1.0;
  const nn::Var sel = tape.constant(select);
  const nn::CVar x{nn::matmul(tx.constellation.re, sel), nn::matmul(tx.constellation.im, sel)};

  const nn::CVar z_r = radar_forward(tape, batch, tx.v, x);
  const nn::Var radar_in = nn::concat_rows({z_r.re, z_r.im});

  const CommVars comm = comm_forward(tape, batch, tx.v, x);
  const nn::Var comm_in = nn::concat_rows({comm.z.re, comm.z.im, comm.kappa.re, comm.kappa.im});
  const nn::Var m_hat = nn::forward(model.net(NetId::CommRx), comm_in);
  const nn::Var j_ce = loss_cce(m_hat, batch.messages);

  const Eigen::RowVectorXd& t = batch.target_present;
  nn::Var radar;
  switch (objective) {
    case RadarObjective::AngleMse: {
      const nn::Var theta_hat = nn::forward(model.net(NetId::Angle), radar_in);
      radar = target_prior * loss_mse(theta_hat, batch.target_angle, t);
      break;
    }
    case RadarObjective::AngleNll: {
      const nn::Var theta_hat = nn::forward(model.net(NetId::Angle), radar_in);
      const nn::Var sigma = nn::forward(model.net(NetId::Uncertainty), radar_in);
      radar = target_prior * loss_tr(theta_hat, sigma, batch.target_angle, t);
      break;
    }
    case RadarObjective::Detection: {
      const nn::Var q = nn::forward(model.net(NetId::Presence), radar_in);
      radar = loss_td(q, t);
      break;
    }
    case RadarObjective::JointNll: {
      const nn::Var q = nn::forward(model.net(NetId::Presence), radar_in);
      const nn::Var theta_hat = nn::forward(model.net(NetId::Angle), radar_in);
      const nn::Var sigma = nn::forward(model.net(NetId::Uncertainty), radar_in);
      radar = loss_td(q, t) + target_prior * loss_tr(theta_hat, sigma, batch.target_angle, t);
      break;
    }
  }
  return {loss_isac(radar, j_ce, omega_r), radar, j_ce};
}

TrainingResult train(const TrainingPlan& plan, const ScenarioConfig& cfg, const ArrayGeometry& geom,
                     const TrainingCallback& on_batch) {
  plan.validate();
  cfg.validate();
  if (geom.num_elements() != cfg.num_antennas) throw std::invalid_argument("train: geometry/config K mismatch");

  const Rng root(plan.seed);
  Rng init_rng = root.derive("init");
  TrainingResult result{IsacModel::init(init_rng, cfg), {}};
  IsacModel& model = result.model;
  result.log.reserve(static_cast<std::size_t>(plan.total_batches()));
  const nn::AdamConfig adam_cfg{plan.learning_rate};

  // One optimizer state per network, carried across the stages in which the
  // network is trained.
  std::vector<std::vector<nn::Matrix*>> params(kNumNets);
  std::vector<nn::AdamState> adam;
  for (std::size_t i = 0; i < kNumNets; ++i) {
    params[i] = model.nets[i].tensors();
    adam.emplace_back(adam_cfg, std::vector<const nn::Matrix*>(params[i].begin(), params[i].end()));
  }

  for (int stage = 1; stage <= 3; ++stage) {
    const auto trainable = stage_trainable(stage);
    const RadarObjective objective = stage_objective(stage);
    Rng data_rng = root.derive("train-stage", static_cast<std::uint64_t>(stage));
    const int batches = plan.stage_batches(stage - 1);
    for (int b = 0; b < batches; ++b) {
      const SceneBatch batch = draw_batch(data_rng, cfg, geom, plan.batch_size);
      nn::Tape tape;
      const BoundModel bound = isac::bind(tape, model, trainable);
      const LossTerms loss = build_loss(tape, bound, batch, cfg.target_prior, objective, plan.omega_r);
      const TrainingLogRow row{stage, b, loss.comm.value()(0, 0), loss.radar.value()(0, 0),
                               loss.total.value()(0, 0)};
      if (!std::isfinite(row.loss_total))
        throw std::runtime_error("train: non-finite loss at stage " + std::to_string(stage) + ", batch " +
                                 std::to_string(b) + " (omega_r = " + std::to_string(plan.omega_r) + ")");
      tape.backward(loss.total);

      for (std::size_t i = 0; i < kNumNets; ++i)
        if (trainable[i]) adam[i].update(params[i], bound.nets[i].grads());

      result.log.push_back(row);
      if (on_batch) on_batch(row);
    }
  }
  return result;
}

void write_training_log(std::ostream& out, const std::vector<TrainingLogRow>& log) {
  out << "stage,batch_index,loss_cce,loss_radar_term,loss_total\n";
  out.precision(17);
  for (const auto& r : log)
    out << r.stage << ',' << r.batch_index << ',' << r.loss_cce << ',' << r.loss_radar_term << ',' << r.loss_total
        << '\n';
}

}  // namespace isac
