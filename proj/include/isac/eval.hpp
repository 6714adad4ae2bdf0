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
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "isac/baselines.hpp"
#include "isac/channels.hpp"
#include "isac/model.hpp"
#include "isac/training.hpp"

namespace isac {

inline constexpr double kDefaultPfa = 1e-2;
inline constexpr std::int64_t kDefaultTestTrials = 300'000;
inline constexpr std::int64_t kDefaultCalibrationTrials = 1'000'000;

struct CalibrationResult {
  double threshold = 0.0;
  double target_pfa = 0.0;
  double achieved_pfa = 0.0;
  std::int64_t n_calibration_trials = 0;
};

// Empirical (1 - target_pfa) quantile of H0 scores; a trial is declared a
// detection when its score exceeds the threshold. Refuses fewer than 100
// expected exceedances and degenerate (constant) score sets.
CalibrationResult calibrate_threshold(std::vector<double> h0_scores, double target_pfa);
using ScoreSource = std::function<std::vector<double>(std::int64_t n)>;
CalibrationResult calibrate_threshold(const ScoreSource& source, double target_pfa, std::int64_t n_trials);

struct RadarOutput {
  Eigen::RowVectorXd score;
  Eigen::RowVectorXd angle;
  Eigen::RowVectorXd sigma;  // empty when the system has no uncertainty estimate
};

// Transmitter and receivers of one ISAC design. The environment (channels)
// lives in evaluate(); a system only sees observations.
class IsacSystem {
 public:
  virtual ~IsacSystem() = default;
  virtual ComplexVec beam() const = 0;
  virtual Eigen::RowVectorXcd constellation() const = 0;
  virtual RadarOutput radar(const Eigen::MatrixXcd& z_r) const = 0;
  virtual std::vector<int> comm(const Eigen::RowVectorXcd& z, const Eigen::RowVectorXcd& kappa) const = 0;
};

class AeSystem final : public IsacSystem {
 public:
  explicit AeSystem(IsacModel model);
  ComplexVec beam() const override { return beam_; }
  Eigen::RowVectorXcd constellation() const override { return constellation_; }
  RadarOutput radar(const Eigen::MatrixXcd& z_r) const override;
  std::vector<int> comm(const Eigen::RowVectorXcd& z, const Eigen::RowVectorXcd& kappa) const override;
  const IsacModel& model() const { return model_; }

 private:
  IsacModel model_;
  ComplexVec beam_;
  Eigen::RowVectorXcd constellation_;
};

// LS radar / comm beams designed on `design_geom`, combined by (rho, phi);
// 4-QAM with ML detection; MAPRT on a grid over the target range.
class BaselineSystem final : public IsacSystem {
 public:
  BaselineSystem(const ScenarioConfig& cfg, const ArrayGeometry& design_geom, MultibeamParams params);
  ComplexVec beam() const override { return beam_; }
  Eigen::RowVectorXcd constellation() const override;
  RadarOutput radar(const Eigen::MatrixXcd& z_r) const override;
  std::vector<int> comm(const Eigen::RowVectorXcd& z, const Eigen::RowVectorXcd& kappa) const override;

  const MultibeamParams& params() const { return params_; }
  const MaprtDetector& detector() const { return *detector_; }
  const ComplexVec& radar_beam() const { return y_radar_; }
  const ComplexVec& comm_beam() const { return y_comm_; }

 private:
  MultibeamParams params_;
  ComplexVec y_radar_;
  ComplexVec y_comm_;
  ComplexVec beam_;
  std::shared_ptr<const MaprtDetector> detector_;
};

// H0 scores (noise-only observations) drawn through `channel_geom`.
std::vector<double> h0_scores(const IsacSystem& system, const ScenarioConfig& cfg, std::int64_t n, const Rng& rng);
CalibrationResult calibrate(const IsacSystem& system, const ScenarioConfig& cfg, double target_pfa,
                            std::int64_t n_trials, const Rng& rng);

enum class KnobKind { OmegaR, RhoPhi };
std::string to_string(KnobKind k);

struct TradeoffPoint {
  KnobKind knob = KnobKind::OmegaR;
  double knob_value_1 = 0.0;
  double knob_value_2 = 0.0;
  double ser = 0.0;
  double pd = 0.0;
  double pfa_emp = 0.0;
  std::optional<double> rmse_rad;  // absent when no target was detected
  double mean_sigma_hat = 0.0;
  std::int64_t n_trials = 0;
  std::int64_t n_target = 0;      // t = 1
  std::int64_t n_no_target = 0;   // t = 0
  std::int64_t n_detected = 0;    // t = t_hat = 1, the RMSE conditioning set
  std::uint64_t seed = 0;
};

// Monte-Carlo metrics over n_trials scenes propagated through channel_geom.
// Trials are processed in fixed-size shards with per-shard streams derived
// from rng, so results do not depend on the number of worker threads.
TradeoffPoint evaluate(const IsacSystem& system, const ScenarioConfig& cfg, const ArrayGeometry& channel_geom,
                       double threshold, std::int64_t n_trials, const Rng& rng);

struct EvalSettings {
  std::int64_t n_trials = kDefaultTestTrials;
  std::int64_t n_calibration = kDefaultCalibrationTrials;
  double target_pfa = kDefaultPfa;
  std::uint64_t seed = 1;

  bool operator==(const EvalSettings&) const = default;
};

// Default benchmark grid: rho in {0, 1/8, ..., 1}, phi in {0, 2pi/8, ..., 14pi/8}.
std::vector<MultibeamParams> default_rho_phi_grid();

// Baseline trade-off sweep. All points share one calibration (the H0
// statistic does not involve the beam) and one set of test scenes.
std::vector<TradeoffPoint> sweep_baseline(const std::vector<MultibeamParams>& grid, const ScenarioConfig& cfg,
                                          const ArrayGeometry& design_geom, const ArrayGeometry& channel_geom,
                                          const EvalSettings& settings);

// Calibrates and evaluates one trained model.
TradeoffPoint evaluate_model(const IsacModel& model, double omega_r, const ScenarioConfig& cfg,
                             const ArrayGeometry& channel_geom, const EvalSettings& settings);

struct AeSweepEntry {
  double omega_r = 0.0;
  IsacModel model;
  TradeoffPoint point;
};
using AeProgress = std::function<void(const AeSweepEntry&)>;

// Trains one model per omega (seed = plan.seed + index) and evaluates it.
std::vector<AeSweepEntry> sweep_ae(const std::vector<double>& omegas, const TrainingPlan& plan_template,
                                   const ScenarioConfig& cfg, const ArrayGeometry& geom,
                                   const EvalSettings& settings, const AeProgress& progress = {});

struct UncertaintyPoint {
  double omega_r = 0.0;
  double mean_sigma_hat = 0.0;
  double rmse_rad = 0.0;
  std::int64_t n_detected = 0;
};
std::vector<UncertaintyPoint> uncertainty_calibration(const std::vector<AeSweepEntry>& trained);

struct ImpairmentResult {
  ArrayGeometry impaired_geometry;
  std::vector<TradeoffPoint> baseline;
  std::vector<AeSweepEntry> ae;
};

// One frozen gap realization with sigma = sigma_lambda_fraction * lambda. The
// baseline is designed for the nominal array but observed through the
// impaired one; the autoencoder trains and tests on the impaired array.
ImpairmentResult impairment_experiment(double sigma_lambda_fraction, std::uint64_t geometry_seed,
                                       const ScenarioConfig& cfg, const TrainingPlan& plan_template,
                                       const std::vector<double>& omegas, const std::vector<MultibeamParams>& grid,
                                       const EvalSettings& settings, const AeProgress& progress = {});
ArrayGeometry impaired_geometry(double sigma_lambda_fraction, std::uint64_t geometry_seed, const ScenarioConfig& cfg);

// CSV outputs.
void write_results_csv_header(std::ostream& out);
void write_results_csv_row(std::ostream& out, const TradeoffPoint& p);
void write_results_csv(std::ostream& out, const std::vector<TradeoffPoint>& points);
// angle_deg, e_db on a 1-degree grid over [-90, 90].
void write_beampattern_csv(std::ostream& out, const ArrayGeometry& geom, const ComplexVec& y);
// RMSE vs mean sigma_hat per omega.
void write_calibration_csv(std::ostream& out, const std::vector<UncertaintyPoint>& points);

}  // namespace isac
