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
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "isac/channels.hpp"
#include "isac/model.hpp"

namespace isac {

struct TrainingPlan {
  double omega_r = 0.0;
  int batch_size = 10000;
  double learning_rate = 0.01;
  std::int64_t total_samples = 2'000'000;
  std::array<double, 3> stage_fractions{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  std::uint64_t seed = 1;

  void validate() const;
  // Number of mini-batches in stage s (0-based), round(total * fraction / batch).
  int stage_batches(int stage) const;
  int total_batches() const;

  bool operator==(const TrainingPlan&) const = default;
};

// Radar term substituted into the joint objective.
enum class RadarObjective {
  AngleMse,     // Pr(t=1) E[|theta_hat - theta|^2]          (stage 1)
  AngleNll,     // Pr(t=1) J_TR                              (stage 2)
  Detection,    // J_TD                                      (stage 3)
  JointNll,     // J_TD + Pr(t=1) J_TR                       (joint objective)
};

struct LossTerms {
  nn::Var total;
  nn::Var radar;
  nn::Var comm;
};

// Records the full transmitter -> channels -> receivers -> loss graph for one batch.
LossTerms build_loss(nn::Tape& tape, const BoundModel& model, const SceneBatch& batch, double target_prior,
                     RadarObjective objective, double omega_r);

struct TrainingLogRow {
  int stage = 0;        // 1-based
  int batch_index = 0;  // within the stage
  double loss_cce = 0.0;
  double loss_radar_term = 0.0;
  double loss_total = 0.0;
};

struct TrainingResult {
  IsacModel model;
  std::vector<TrainingLogRow> log;
};

// Networks updated in each stage: 1 {enc, bf, comm, angle}, 2 {enc, bf, comm,
// uncertainty}, 3 {enc, bf, comm, presence}.
std::array<bool, kNumNets> stage_trainable(int stage);
RadarObjective stage_objective(int stage);

using TrainingCallback = std::function<void(const TrainingLogRow&)>;

// Three-stage sequential training on fresh i.i.d. batches. Throws
// std::runtime_error if a loss becomes non-finite.
TrainingResult train(const TrainingPlan& plan, const ScenarioConfig& cfg, const ArrayGeometry& geom,
                     const TrainingCallback& on_batch = {});

void write_training_log(std::ostream& out, const std::vector<TrainingLogRow>& log);

}  // namespace isac
