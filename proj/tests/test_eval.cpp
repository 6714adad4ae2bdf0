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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "isac/eval.hpp"
#include "isac/stats.hpp"

using namespace isac;

namespace {

// Transmits on element 0 only, so z_r = alpha a(theta) x + n and kappa = beta.
// The angle follows from the phase step between elements 0 and 1.
class OracleSystem final : public IsacSystem {
 public:
  explicit OracleSystem(int K, double sigma = 0.0) : K_(K), sigma_(sigma) {}
  ComplexVec beam() const override {
    ComplexVec v = ComplexVec::Zero(K_);
    v[0] = 1.0;
    return v;
  }
  Eigen::RowVectorXcd constellation() const override {
    const auto c = qam4_constellation();
    return Eigen::Map<const Eigen::RowVectorXcd>(c.data(), 4);
  }
  RadarOutput radar(const Eigen::MatrixXcd& z) const override {
    RadarOutput out;
    out.score = z.colwise().squaredNorm();
    out.angle.resize(z.cols());
    for (Eigen::Index b = 0; b < z.cols(); ++b)
      out.angle(b) = std::asin(-std::arg(z(1, b) * std::conj(z(0, b))) / std::numbers::pi);
    if (sigma_ > 0.0) out.sigma = Eigen::RowVectorXd::Constant(z.cols(), sigma_);
    return out;
  }
  std::vector<int> comm(const Eigen::RowVectorXcd& z, const Eigen::RowVectorXcd& kappa) const override {
    const auto c = qam4_constellation();
    std::vector<int> m(static_cast<std::size_t>(z.size()));
    for (Eigen::Index b = 0; b < z.size(); ++b) m[static_cast<std::size_t>(b)] = ml_comm_detect(z(b), kappa(b), c);
    return m;
  }

 private:
  int K_;
  double sigma_;
};

ScenarioConfig noiseless() {
  ScenarioConfig c;
  c.noise_psd = 1e-20;
  c.radar_snr_db = 200.0;
  c.comm_snr_db = 200.0;
  return c;
}

}  // namespace

TEST(Stats, BinomialIntervalMatchesBruteForce) {
  const std::int64_t n = 200;
  const double p = 0.1;
  const auto ci = stats::binomial_interval(n, p, 0.99);
  // Direct pmf sums.
  std::vector<double> pmf(n + 1);
  for (int k = 0; k <= n; ++k)
    pmf[static_cast<std::size_t>(k)] =
        std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) + k * std::log(p) + (n - k) * std::log1p(-p));
  double below = 0.0, above = 0.0;
  for (std::int64_t k = 0; k < ci.lo; ++k) below += pmf[static_cast<std::size_t>(k)];
  for (std::int64_t k = ci.hi + 1; k <= n; ++k) above += pmf[static_cast<std::size_t>(k)];
  EXPECT_LE(below, 0.005);
  EXPECT_LE(above, 0.005);
  EXPECT_GT(below + pmf[static_cast<std::size_t>(ci.lo)], 0.005);
  EXPECT_GT(above + pmf[static_cast<std::size_t>(ci.hi)], 0.005);
  EXPECT_THROW(stats::binomial_interval(0, 0.5, 0.9), std::invalid_argument);
}

TEST(Stats, KsSameAndShiftedDistributions) {
  Rng r(1);
  std::vector<double> a(5000), b(5000), c(5000);
  for (auto& x : a) x = r.normal(0, 1);
  for (auto& x : b) x = r.normal(0, 1);
  for (auto& x : c) x = r.normal(0.2, 1);
  EXPECT_GT(stats::ks_two_sample(a, b).p_value, 0.001);
  EXPECT_LT(stats::ks_two_sample(a, c).p_value, 1e-6);
  const std::vector<double> x{1, 2, 3}, y{4, 5, 6};
  EXPECT_DOUBLE_EQ(stats::ks_two_sample(x, y).statistic, 1.0);
}

TEST(Stats, SpearmanKnownValues) {
  const std::vector<double> x{1, 2, 3, 4, 5};
  const std::vector<double> y{2, 4, 9, 16, 100};
  const std::vector<double> z{5, 4, 3, 2, 1};
  EXPECT_DOUBLE_EQ(stats::spearman(x, y), 1.0);
  EXPECT_DOUBLE_EQ(stats::spearman(x, z), -1.0);
  const std::vector<double> t{1, 2, 2, 3};
  const std::vector<double> u{1, 3, 2, 4};
  // Ranks (1, 2.5, 2.5, 4) vs (1, 3, 2, 4): Pearson on ranks.
  EXPECT_NEAR(stats::spearman(t, u), 0.9486832980505138, 1e-12);
}

TEST(Calibration, UniformQuantile) {
  Rng r(2);
  std::vector<double> s(1'000'000);
  for (auto& x : s) x = r.uniform(0, 1);
  const CalibrationResult c = calibrate_threshold(s, 1e-2);
  EXPECT_NEAR(c.threshold, 0.99, 1e-3);
  EXPECT_NEAR(c.achieved_pfa, 1e-2, 1e-5);
  EXPECT_EQ(c.n_calibration_trials, 1'000'000);
}

TEST(Calibration, RefusesNoisyOrDegenerate) {
  EXPECT_THROW(calibrate_threshold(std::vector<double>(9999, 0.0), 1e-2), std::invalid_argument);
  EXPECT_THROW(calibrate_threshold(std::vector<double>(20000, 0.3), 1e-2), std::runtime_error);
  const ScoreSource src = [](std::int64_t n) { return std::vector<double>(static_cast<std::size_t>(n), 1.0); };
  EXPECT_THROW(calibrate_threshold(src, 1e-2, 5000), std::invalid_argument);
}

TEST(Calibration, MaprtHoldoutWithinBinomialInterval) {
  const ScenarioConfig cfg;
  const BaselineSystem sys(cfg, ArrayGeometry::nominal(16), {1.0, 0.0});
  const CalibrationResult cal = calibrate(sys, cfg, 1e-2, 1'000'000, Rng(3).derive("calibration"));
  const std::int64_t n = 100'000;
  const std::vector<double> held = h0_scores(sys, cfg, n, Rng(3).derive("holdout"));
  const auto fa = std::count_if(held.begin(), held.end(), [&](double s) { return s > cal.threshold; });
  const auto ci = stats::binomial_interval(n, 1e-2, 0.99);
  EXPECT_GE(fa, ci.lo);
  EXPECT_LE(fa, ci.hi);
  EXPECT_GE(fa / static_cast<double>(n), 0.008);
  EXPECT_LE(fa / static_cast<double>(n), 0.012);
}

TEST(Calibration, H0StatisticIsBeamIndependent) {
  const ScenarioConfig cfg;
  const ArrayGeometry g = ArrayGeometry::nominal(16);
  const BaselineSystem radar(cfg, g, {1.0, 0.0});
  const BaselineSystem comm(cfg, g, {0.0, 0.0});
  const std::vector<double> a = h0_scores(radar, cfg, 20'000, Rng(4));
  const std::vector<double> b = h0_scores(comm, cfg, 20'000, Rng(5));
  EXPECT_GT(stats::ks_two_sample(a, b).p_value, 0.001);
}

TEST(Evaluate, PerfectOracle) {
  const ScenarioConfig cfg = noiseless();
  const OracleSystem sys(16, 0.25);
  const TradeoffPoint p = evaluate(sys, cfg, ArrayGeometry::nominal(16), 1e-12, 20'000, Rng(6));
  EXPECT_EQ(p.ser, 0.0);
  EXPECT_EQ(p.pd, 1.0);
  EXPECT_EQ(p.pfa_emp, 0.0);
  ASSERT_TRUE(p.rmse_rad.has_value());
  EXPECT_LT(*p.rmse_rad, 1e-8);
  EXPECT_NEAR(p.mean_sigma_hat, 0.25, 1e-12);
  EXPECT_EQ(p.n_trials, 20'000);
  EXPECT_EQ(p.n_target + p.n_no_target, p.n_trials);
  EXPECT_EQ(p.n_detected, p.n_target);
}

TEST(Evaluate, NoDetectionsLeavesRmseAbsent) {
  const ScenarioConfig cfg = noiseless();
  const TradeoffPoint p = evaluate(OracleSystem(16), cfg, ArrayGeometry::nominal(16), 1e300, 5000, Rng(7));
  EXPECT_EQ(p.pd, 0.0);
  EXPECT_FALSE(p.rmse_rad.has_value());
  EXPECT_EQ(p.n_detected, 0);
  std::ostringstream out;
  write_results_csv_row(out, p);
  EXPECT_NE(out.str().find(",,"), std::string::npos);
}

TEST(Evaluate, DeterministicAndThreadIndependent) {
  const ScenarioConfig cfg;
  const BaselineSystem sys(cfg, ArrayGeometry::nominal(16), {0.5, 1.0});
  const TradeoffPoint a = evaluate(sys, cfg, ArrayGeometry::nominal(16), 30.0, 9000, Rng(8));
  const TradeoffPoint b = evaluate(sys, cfg, ArrayGeometry::nominal(16), 30.0, 9000, Rng(8));
  std::ostringstream sa, sb;
  write_results_csv_row(sa, a);
  write_results_csv_row(sb, b);
  EXPECT_EQ(sa.str(), sb.str());
  EXPECT_GE(a.pd, 0.0);
  EXPECT_LE(a.pd, 1.0);
}

TEST(Evaluate, RejectsNonPositiveTrials) {
  EXPECT_THROW(evaluate(OracleSystem(16), ScenarioConfig{}, ArrayGeometry::nominal(16), 0.0, 0, Rng(1)),
               std::invalid_argument);
}

TEST(SweepBaseline, MatchesDirectEvaluation) {
  // The factored sweep must agree with the generic system path on identical scenes.
  const ScenarioConfig cfg;
  const ArrayGeometry g = ArrayGeometry::nominal(16);
  EvalSettings s;
  s.n_trials = 12'000;
  s.n_calibration = 20'000;
  s.seed = 9;
  const std::vector<MultibeamParams> grid{{1.0, 0.0}, {0.5, 2.0}, {0.0, 0.0}};
  const auto pts = sweep_baseline(grid, cfg, g, g, s);
  ASSERT_EQ(pts.size(), 3u);
  const Rng root(s.seed);
  const BaselineSystem first(cfg, g, grid[0]);
  const CalibrationResult cal = calibrate(first, cfg, s.target_pfa, s.n_calibration, root.derive("calibration"));
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const BaselineSystem sys(cfg, g, grid[j]);
    const TradeoffPoint d = evaluate(sys, cfg, g, cal.threshold, s.n_trials, root.derive("test"));
    EXPECT_EQ(pts[j].knob, KnobKind::RhoPhi);
    EXPECT_EQ(pts[j].knob_value_1, grid[j].rho);
    EXPECT_EQ(pts[j].ser, d.ser);
    EXPECT_EQ(pts[j].pfa_emp, d.pfa_emp);
    EXPECT_NEAR(pts[j].pd, d.pd, 2.0 / d.n_target);  // ties at the grid maximum may flip one trial
  }
  // More radar power, more detections; less comm power, more symbol errors.
  EXPECT_GT(pts[0].pd, pts[2].pd);
  EXPECT_GT(pts[0].ser, pts[2].ser);
}

TEST(SweepBaseline, DefaultGridCardinality) {
  const auto grid = default_rho_phi_grid();
  EXPECT_EQ(grid.size(), 72u);
  EXPECT_EQ(grid.front().rho, 0.0);
  EXPECT_EQ(grid.back().rho, 1.0);
  EXPECT_NEAR(grid[7].phi, 7 * std::numbers::pi / 4, 1e-15);
}

TEST(Uncertainty, StubSigmaIsReported) {
  const ScenarioConfig cfg = noiseless();
  const TradeoffPoint p = evaluate(OracleSystem(16, 0.037), cfg, ArrayGeometry::nominal(16), 1e-12, 4096, Rng(10));
  EXPECT_NEAR(p.mean_sigma_hat, 0.037, 1e-12);
}

TEST(Impairment, ZeroSigmaIsNominal) {
  const ScenarioConfig cfg;
  EXPECT_EQ(impaired_geometry(0.0, 2024, cfg), ArrayGeometry::nominal(16));
  const ArrayGeometry g = impaired_geometry(1.0 / 30.0, 2024, cfg);
  EXPECT_EQ(g, impaired_geometry(1.0 / 30.0, 2024, cfg));
  EXPECT_FALSE(g.is_nominal());
}

TEST(Csv, ResultsSchema) {
  TradeoffPoint p;
  p.knob = KnobKind::OmegaR;
  p.knob_value_1 = 0.09;
  p.ser = 0.001;
  p.pd = 0.5;
  p.pfa_emp = 0.01;
  p.rmse_rad = 0.02;
  p.mean_sigma_hat = 0.03;
  p.n_trials = 100;
  p.seed = 7;
  std::ostringstream out;
  write_results_csv(out, {p});
  std::istringstream in(out.str());
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  EXPECT_EQ(header, "knob_kind,knob_value_1,knob_value_2,ser,pd,pfa_emp,rmse_rad,mean_sigma_hat,n_trials,seed");
  EXPECT_EQ(row.substr(0, 13), "omega_r,0.09,");
  EXPECT_EQ(std::count(row.begin(), row.end(), ','), 9);
  EXPECT_EQ(row.substr(row.size() - 6), ",100,7");
}

TEST(Csv, BeampatternAndCalibration) {
  const ArrayGeometry g = ArrayGeometry::nominal(16);
  ComplexVec y = ComplexVec::Zero(16);
  y[0] = 1.0;
  std::ostringstream out;
  write_beampattern_csv(out, g, y);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "angle_deg,e_db");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    EXPECT_NEAR(std::stod(line.substr(line.find(',') + 1)), 0.0, 1e-9);  // single element: 0 dB everywhere
  }
  EXPECT_EQ(rows, 181);

  std::ostringstream cal;
  write_calibration_csv(cal, {{0.5, 0.02, 0.03, 1000}});
  EXPECT_EQ(cal.str().substr(0, cal.str().find('\n')), "omega_r,mean_sigma_hat,rmse_rad,n_detected");
}
