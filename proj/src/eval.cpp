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

#include "isac/eval.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <thread>

namespace isac {
namespace {

constexpr std::int64_t kShardSize = 4096;

// Runs fn(shard_index, count) for every shard, distributing shards over
// hardware threads. fn must only write to per-shard state.
template <class Fn>
void for_each_shard(std::int64_t n, Fn&& fn) {
  const std::int64_t shards = (n + kShardSize - 1) / kShardSize;
  const auto count = [&](std::int64_t s) { return std::min(kShardSize, n - s * kShardSize); };
  const std::int64_t workers =
      std::clamp<std::int64_t>(static_cast<std::int64_t>(std::thread::hardware_concurrency()), 1, shards);
  if (workers <= 1) {
    for (std::int64_t s = 0; s < shards; ++s) fn(s, count(s));
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  for (std::int64_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::int64_t s = w; s < shards; s += workers) fn(s, count(s));
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

struct Tally {
  std::int64_t trials = 0;
  std::int64_t symbol_errors = 0;
  std::int64_t target = 0;
  std::int64_t detected = 0;     // t = 1, t_hat = 1
  std::int64_t no_target = 0;
  std::int64_t false_alarms = 0;
  double sq_angle_error = 0.0;   // over detected
  double sigma_sum = 0.0;        // over detected

  void merge(const Tally& o) {
    trials += o.trials;
    symbol_errors += o.symbol_errors;
    target += o.target;
    detected += o.detected;
    no_target += o.no_target;
    false_alarms += o.false_alarms;
    sq_angle_error += o.sq_angle_error;
    sigma_sum += o.sigma_sum;
  }
};

TradeoffPoint to_point(const Tally& t, std::uint64_t seed) {
  TradeoffPoint p;
  p.n_trials = t.trials;
  p.n_target = t.target;
  p.n_no_target = t.no_target;
  p.n_detected = t.detected;
  p.seed = seed;
  p.ser = t.trials ? static_cast<double>(t.symbol_errors) / static_cast<double>(t.trials) : 0.0;
  p.pd = t.target ? static_cast<double>(t.detected) / static_cast<double>(t.target) : 0.0;
  p.pfa_emp = t.no_target ? static_cast<double>(t.false_alarms) / static_cast<double>(t.no_target) : 0.0;
  if (t.detected > 0) {
    p.rmse_rad = std::sqrt(t.sq_angle_error / static_cast<double>(t.detected));
    p.mean_sigma_hat = t.sigma_sum / static_cast<double>(t.detected);
  }
  return p;
}

Eigen::RowVectorXcd symbols_for(const SceneBatch& batch, const Eigen::RowVectorXcd& constellation) {
  Eigen::RowVectorXcd x(batch.size());
  for (Eigen::Index b = 0; b < batch.size(); ++b) x(b) = constellation(batch.messages[static_cast<std::size_t>(b)]);
  return x;
}

Eigen::MatrixXcd noise_block(Rng& rng, double variance, int rows, std::int64_t cols) {
  Eigen::MatrixXcd z(rows, cols);
  for (Eigen::Index c = 0; c < z.cols(); ++c)
    for (Eigen::Index r = 0; r < z.rows(); ++r) z(r, c) = sample_cn(rng, variance);
  return z;
}

// Shortest decimal that reads back to the same double.
std::string fmt(double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

ArrayGeometry nominal_for(const ScenarioConfig& cfg) { return ArrayGeometry::nominal(cfg.num_antennas); }

}  // namespace

CalibrationResult calibrate_threshold(std::vector<double> scores, double target_pfa) {
  if (!(target_pfa > 0.0 && target_pfa < 1.0)) throw std::invalid_argument("calibrate_threshold: pfa must be in (0, 1)");
  const auto n = static_cast<std::int64_t>(scores.size());
  if (static_cast<double>(n) * target_pfa < 100.0)
    throw std::invalid_argument("calibrate_threshold: n_trials * target_pfa < 100, quantile too noisy");
  const auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
  if (*lo == *hi) throw std::runtime_error("calibrate_threshold: degenerate (constant) score distribution");
  const auto exceed = static_cast<std::int64_t>(std::llround(target_pfa * static_cast<double>(n)));
  const auto k = static_cast<std::size_t>(n - exceed - 1);
  std::nth_element(scores.begin(), scores.begin() + static_cast<std::ptrdiff_t>(k), scores.end());
  const double threshold = scores[k];
  const auto above = std::count_if(scores.begin(), scores.end(), [&](double s) { return s > threshold; });
  return {threshold, target_pfa, static_cast<double>(above) / static_cast<double>(n), n};
}

CalibrationResult calibrate_threshold(const ScoreSource& source, double target_pfa, std::int64_t n_trials) {
  if (static_cast<double>(n_trials) * target_pfa < 100.0)
    throw std::invalid_argument("calibrate_threshold: n_trials * target_pfa < 100, quantile too noisy");
  std::vector<double> scores = source(n_trials);
  if (static_cast<std::int64_t>(scores.size()) != n_trials)
    throw std::runtime_error("calibrate_threshold: score source returned the wrong count");
  return calibrate_threshold(std::move(scores), target_pfa);
}

AeSystem::AeSystem(IsacModel model)
    : model_(std::move(model)), beam_(beamformer(model_)), constellation_(isac::constellation(model_)) {}

RadarOutput AeSystem::radar(const Eigen::MatrixXcd& z_r) const {
  RadarEstimates e = radar_receive(model_, z_r);
  return {std::move(e.presence), std::move(e.angle), std::move(e.sigma)};
}

std::vector<int> AeSystem::comm(const Eigen::RowVectorXcd& z, const Eigen::RowVectorXcd& kappa) const {
  const Eigen::MatrixXd p = comm_receive(model_, z, kappa);
  std::vector<int> out(static_cast<std::size_t>(p.cols()));
  for (Eigen::Index c = 0; c < p.cols(); ++c) {
    Eigen::Index best = 0;
    p.col(c).maxCoeff(&best);
    out[static_cast<std::size_t>(c)] = static_cast<int>(best);
  }
  return out;
}

BaselineSystem::BaselineSystem(const ScenarioConfig& cfg, const ArrayGeometry& design_geom, MultibeamParams params)
    : params_(params) {
  if (cfg.modulation_size != 4) throw std::invalid_argument("BaselineSystem: benchmark uses 4-QAM (M = 4)");
  y_radar_ = ls_beam(BeamSynthesisSpec::uniform(design_geom, cfg.target_range));
  y_comm_ = ls_beam(BeamSynthesisSpec::uniform(design_geom, cfg.rx_range));
  beam_ = multibeam(y_radar_, y_comm_, params, cfg.energy_budget);
  detector_ = std::make_shared<const MaprtDetector>(MaprtDetector::uniform(design_geom, cfg.target_range));
}

Eigen::RowVectorXcd BaselineSystem::constellation() const {
  const auto c = qam4_constellation();
  Eigen::RowVectorXcd out(4);
  for (int m = 0; m < 4; ++m) out(m) = c[static_cast<std::size_t>(m)];
  return out;
}

RadarOutput BaselineSystem::radar(const Eigen::MatrixXcd& z_r) const {
  const std::vector<MaprtResult> r = detector_->evaluate(z_r);
  RadarOutput out{Eigen::RowVectorXd(z_r.cols()), Eigen::RowVectorXd(z_r.cols()), {}};
  for (std::size_t b = 0; b < r.size(); ++b) {
    out.score(static_cast<Eigen::Index>(b)) = r[b].statistic;
    out.angle(static_cast<Eigen::Index>(b)) = r[b].angle;
  }
  return out;
}

std::vector<int> BaselineSystem::comm(const Eigen::RowVectorXcd& z, const Eigen::RowVectorXcd& kappa) const {
  const auto c = qam4_constellation();
  std::vector<int> out(static_cast<std::size_t>(z.size()));
  for (Eigen::Index b = 0; b < z.size(); ++b) out[static_cast<std::size_t>(b)] = ml_comm_detect(z(b), kappa(b), c);
  return out;
}

std::vector<double> h0_scores(const IsacSystem& system, const ScenarioConfig& cfg, std::int64_t n, const Rng& rng) {
  std::vector<double> scores(static_cast<std::size_t>(n));
  for_each_shard(n, [&](std::int64_t s, std::int64_t count) {
    Rng shard = rng.derive("h0-shard", static_cast<std::uint64_t>(s));
    const Eigen::MatrixXcd z = noise_block(shard, cfg.noise_psd, cfg.num_antennas, count);
    const RadarOutput r = system.radar(z);
    std::copy(r.score.data(), r.score.data() + count, scores.begin() + s * kShardSize);
  });
  return scores;
}

CalibrationResult calibrate(const IsacSystem& system, const ScenarioConfig& cfg, double target_pfa,
                            std::int64_t n_trials, const Rng& rng) {
  return calibrate_threshold([&](std::int64_t n) { return h0_scores(system, cfg, n, rng); }, target_pfa, n_trials);
}

std::string to_string(KnobKind k) { return k == KnobKind::OmegaR ? "omega_r" : "rho_phi"; }

TradeoffPoint evaluate(const IsacSystem& system, const ScenarioConfig& cfg, const ArrayGeometry& channel_geom,
                       double threshold, std::int64_t n_trials, const Rng& rng) {
  if (n_trials <= 0) throw std::invalid_argument("evaluate: n_trials must be positive");
  const ComplexVec v = system.beam();
  const Eigen::RowVectorXcd constellation = system.constellation();
  const std::int64_t shards = (n_trials + kShardSize - 1) / kShardSize;
  std::vector<Tally> tallies(static_cast<std::size_t>(shards));

  for_each_shard(n_trials, [&](std::int64_t s, std::int64_t count) {
    Rng shard = rng.derive("eval-shard", static_cast<std::uint64_t>(s));
    const SceneBatch batch = draw_batch(shard, cfg, channel_geom, count);
    const Eigen::RowVectorXcd x = symbols_for(batch, constellation);
    const RadarOutput radar = system.radar(radar_forward(batch, v, x));
    const CommBatch c = comm_forward(batch, v, x);
    const std::vector<int> m_hat = system.comm(c.z, c.kappa);

    Tally& t = tallies[static_cast<std::size_t>(s)];
    for (Eigen::Index b = 0; b < batch.size(); ++b) {
      ++t.trials;
      if (m_hat[static_cast<std::size_t>(b)] != batch.messages[static_cast<std::size_t>(b)]) ++t.symbol_errors;
      const bool detect = radar.score(b) > threshold;
      if (batch.target_present(b) != 0.0) {
        ++t.target;
        if (detect) {
          ++t.detected;
          const double e = radar.angle(b) - batch.target_angle(b);
          t.sq_angle_error += e * e;
          if (radar.sigma.size() > 0) t.sigma_sum += radar.sigma(b);
        }
      } else {
        ++t.no_target;
        if (detect) ++t.false_alarms;
      }
    }
  });

  Tally total;
  for (const Tally& t : tallies) total.merge(t);
  return to_point(total, rng.seed());
}

std::vector<MultibeamParams> default_rho_phi_grid() {
  std::vector<MultibeamParams> grid;
  for (int i = 0; i <= 8; ++i)
    for (int j = 0; j < 8; ++j) grid.push_back({i / 8.0, 2.0 * std::numbers::pi * j / 8.0});
  return grid;
}

std::vector<TradeoffPoint> sweep_baseline(const std::vector<MultibeamParams>& grid, const ScenarioConfig& cfg,
                                          const ArrayGeometry& design_geom, const ArrayGeometry& channel_geom,
                                          const EvalSettings& settings) {
  if (grid.empty()) throw std::invalid_argument("sweep_baseline: empty (rho, phi) grid");
  cfg.validate();
  const Rng root(settings.seed);

  std::vector<BaselineSystem> systems;
  for (const MultibeamParams& p : grid) systems.emplace_back(cfg, design_geom, p);
  const BaselineSystem& ref = systems.front();
  const MaprtDetector& det = ref.detector();
  const Eigen::RowVectorXcd constellation = ref.constellation();
  const auto qam = qam4_constellation();

  const CalibrationResult cal =
      calibrate(ref, cfg, settings.target_pfa, settings.n_calibration, root.derive("calibration"));

  const std::int64_t n = settings.n_trials;
  const std::int64_t shards = (n + kShardSize - 1) / kShardSize;
  const std::size_t J = systems.size();
  std::vector<std::vector<Tally>> tallies(static_cast<std::size_t>(shards), std::vector<Tally>(J));
  const Rng test_rng = root.derive("test");

  for_each_shard(n, [&](std::int64_t s, std::int64_t count) {
    Rng shard = test_rng.derive("eval-shard", static_cast<std::uint64_t>(s));
    const SceneBatch batch = draw_batch(shard, cfg, channel_geom, count);
    const Eigen::RowVectorXcd x = symbols_for(batch, constellation);
    // z_r = s_b a(theta_b) + n_b, so P z_r = s_b (P a(theta_b)) + P n_b with the
    // beam entering only through the scalar s_b.
    const Eigen::MatrixXcd U = det.projector() * batch.target_steering;
    const Eigen::MatrixXcd W = det.projector() * batch.radar_noise;
    const Eigen::Index G = W.rows();
    std::vector<MaprtResult> h0(static_cast<std::size_t>(count));
    for (Eigen::Index b = 0; b < count; ++b) {
      if (batch.target_present(b) != 0.0) continue;
      Eigen::Index best = 0;
      const double stat = W.col(b).cwiseAbs2().maxCoeff(&best);
      h0[static_cast<std::size_t>(b)] = {stat, det.grid()[static_cast<std::size_t>(best)]};
    }

    for (std::size_t j = 0; j < J; ++j) {
      const ComplexVec& v = systems[j].beam();
      const Eigen::RowVectorXcd g_tgt = v.transpose() * batch.target_steering;
      const Eigen::RowVectorXcd g_rx = v.transpose() * batch.rx_steering;
      Tally& t = tallies[static_cast<std::size_t>(s)][j];
      for (Eigen::Index b = 0; b < count; ++b) {
        ++t.trials;
        const cplx kappa = batch.comm_gain(b) * g_rx(b);
        const cplx z_c = kappa * x(b) + batch.comm_noise(b);
        if (ml_comm_detect(z_c, kappa, qam) != batch.messages[static_cast<std::size_t>(b)]) ++t.symbol_errors;

        if (batch.target_present(b) != 0.0) {
          ++t.target;
          const cplx sb = batch.radar_gain(b) * g_tgt(b) * x(b);
          double best_stat = -1.0;
          Eigen::Index best = 0;
          for (Eigen::Index i = 0; i < G; ++i) {
            const double p = std::norm(sb * U(i, b) + W(i, b));
            if (p > best_stat) {
              best_stat = p;
              best = i;
            }
          }
          if (best_stat > cal.threshold) {
            ++t.detected;
            const double e = det.grid()[static_cast<std::size_t>(best)] - batch.target_angle(b);
            t.sq_angle_error += e * e;
          }
        } else {
          ++t.no_target;
          if (h0[static_cast<std::size_t>(b)].statistic > cal.threshold) ++t.false_alarms;
        }
      }
    }
  });

  std::vector<TradeoffPoint> out;
  for (std::size_t j = 0; j < J; ++j) {
    Tally total;
    for (const auto& shard : tallies) total.merge(shard[j]);
    TradeoffPoint p = to_point(total, settings.seed);
    p.knob = KnobKind::RhoPhi;
    p.knob_value_1 = grid[j].rho;
    p.knob_value_2 = grid[j].phi;
    out.push_back(p);
  }
  return out;
}

TradeoffPoint evaluate_model(const IsacModel& model, double omega_r, const ScenarioConfig& cfg,
                             const ArrayGeometry& channel_geom, const EvalSettings& settings) {
  const AeSystem system(model);
  const Rng root(settings.seed);
  const CalibrationResult cal =
      calibrate(system, cfg, settings.target_pfa, settings.n_calibration, root.derive("calibration"));
  TradeoffPoint p = evaluate(system, cfg, channel_geom, cal.threshold, settings.n_trials, root.derive("test"));
  p.knob = KnobKind::OmegaR;
  p.knob_value_1 = omega_r;
  p.seed = settings.seed;
  return p;
}

std::vector<AeSweepEntry> sweep_ae(const std::vector<double>& omegas, const TrainingPlan& plan_template,
                                   const ScenarioConfig& cfg, const ArrayGeometry& geom,
                                   const EvalSettings& settings, const AeProgress& progress) {
  std::vector<AeSweepEntry> out;
  for (std::size_t i = 0; i < omegas.size(); ++i) {
    TrainingPlan plan = plan_template;
    plan.omega_r = omegas[i];
    plan.seed = plan_template.seed + i;
    TrainingResult trained = train(plan, cfg, geom);
    TradeoffPoint p = evaluate_model(trained.model, omegas[i], cfg, geom, settings);
    out.push_back({omegas[i], std::move(trained.model), p});
    if (progress) progress(out.back());
  }
  return out;
}

std::vector<UncertaintyPoint> uncertainty_calibration(const std::vector<AeSweepEntry>& trained) {
  std::vector<UncertaintyPoint> out;
  for (const AeSweepEntry& e : trained) {
    if (!e.point.rmse_rad) continue;
    out.push_back({e.omega_r, e.point.mean_sigma_hat, *e.point.rmse_rad, e.point.n_detected});
  }
  return out;
}

ArrayGeometry impaired_geometry(double sigma_lambda_fraction, std::uint64_t geometry_seed, const ScenarioConfig& cfg) {
  const ArrayGeometry nominal = nominal_for(cfg);
  Rng rng = Rng(geometry_seed).derive("geometry");
  return perturb_geometry(rng, cfg.num_antennas, nominal.wavelength(), sigma_lambda_fraction * nominal.wavelength());
}

ImpairmentResult impairment_experiment(double sigma_lambda_fraction, std::uint64_t geometry_seed,
                                       const ScenarioConfig& cfg, const TrainingPlan& plan_template,
                                       const std::vector<double>& omegas, const std::vector<MultibeamParams>& grid,
                                       const EvalSettings& settings, const AeProgress& progress) {
  ImpairmentResult r{impaired_geometry(sigma_lambda_fraction, geometry_seed, cfg), {}, {}};
  if (!grid.empty()) r.baseline = sweep_baseline(grid, cfg, nominal_for(cfg), r.impaired_geometry, settings);
  if (!omegas.empty()) r.ae = sweep_ae(omegas, plan_template, cfg, r.impaired_geometry, settings, progress);
  return r;
}

void write_results_csv_header(std::ostream& out) {
  out << "knob_kind,knob_value_1,knob_value_2,ser,pd,pfa_emp,rmse_rad,mean_sigma_hat,n_trials,seed\n";
}

void write_results_csv_row(std::ostream& out, const TradeoffPoint& p) {
  out << to_string(p.knob) << ',' << fmt(p.knob_value_1) << ',' << fmt(p.knob_value_2) << ',' << fmt(p.ser) << ','
      << fmt(p.pd) << ',' << fmt(p.pfa_emp) << ',';
  if (p.rmse_rad) out << fmt(*p.rmse_rad);
  out << ',' << fmt(p.mean_sigma_hat) << ',' << p.n_trials << ',' << p.seed << '\n';
}

void write_results_csv(std::ostream& out, const std::vector<TradeoffPoint>& points) {
  write_results_csv_header(out);
  for (const auto& p : points) write_results_csv_row(out, p);
}

void write_beampattern_csv(std::ostream& out, const ArrayGeometry& geom, const ComplexVec& y) {
  out << "angle_deg,e_db\n";
  for (int deg = -90; deg <= 90; ++deg) {
    const double e = beampattern(geom, y, deg2rad(deg));
    out << deg << ',' << fmt(lin2db(std::max(e, 1e-30))) << '\n';
  }
}

void write_calibration_csv(std::ostream& out, const std::vector<UncertaintyPoint>& points) {
  out << "omega_r,mean_sigma_hat,rmse_rad,n_detected\n";
  for (const auto& p : points)
    out << fmt(p.omega_r) << ',' << fmt(p.mean_sigma_hat) << ',' << fmt(p.rmse_rad) << ',' << p.n_detected << '\n';
}

}  // namespace isac
