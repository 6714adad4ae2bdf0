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

#include <cmath>
#include <numbers>

#include "isac/baselines.hpp"
#include "isac/channels.hpp"
#include "support/maprt_oracle.hpp"

using namespace isac;

namespace {

ComplexVec random_unit(Rng& r, int K) {
  const ComplexVec v = sample_cn(r, 1.0, static_cast<std::size_t>(K));
  return v / v.norm();
}

}  // namespace

TEST(Qam4, ConstellationGeometry) {
  const auto c = qam4_constellation();
  double e = 0.0;
  for (cplx x : c) e += std::norm(x) / 4.0;
  EXPECT_NEAR(e, 1.0, 1e-15);
  EXPECT_NEAR(std::abs(qam4_map(0) - cplx(1, 1) / std::sqrt(2.0)), 0.0, 1e-15);
  double dmin = 1e9;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) dmin = std::min(dmin, std::abs(c[static_cast<std::size_t>(i)] - c[static_cast<std::size_t>(j)]));
  EXPECT_NEAR(dmin, std::sqrt(2.0), 1e-15);
  // Gray labelling: neighbours differ in one bit.
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if (std::abs(std::abs(c[static_cast<std::size_t>(i)] - c[static_cast<std::size_t>(j)]) - std::sqrt(2.0)) < 1e-12)
        EXPECT_EQ(__builtin_popcount(static_cast<unsigned>(i ^ j)), 1);
  EXPECT_THROW(qam4_map(4), std::out_of_range);
}

TEST(LsBeam, FirstOrderOptimality) {
  const ArrayGeometry g = ArrayGeometry::nominal(16);
  const BeamSynthesisSpec synth = BeamSynthesisSpec::uniform(g, {deg2rad(-20), deg2rad(20)});
  ASSERT_EQ(synth.grid.size(), 181u);
  const Eigen::VectorXd b = desired_pattern(synth);
  EXPECT_EQ(b.maxCoeff(), 16.0);
  EXPECT_EQ(b.sum(), 16.0 * 41);
  const ComplexVec y = ls_beam_unnormalized(synth, b);
  const Eigen::MatrixXcd A = steering_matrix(g, synth.grid);
  const ComplexVec grad = A.conjugate() * (A.transpose() * y - b.cast<cplx>());
  EXPECT_LT(grad.norm(), 1e-6 * (A.conjugate() * b.cast<cplx>()).norm());
  EXPECT_NEAR(ls_beam(synth).norm(), 1.0, 1e-12);
}

TEST(LsBeam, LocalAndGlobalMinimality) {
  const ArrayGeometry g = ArrayGeometry::nominal(16);
  const BeamSynthesisSpec synth = BeamSynthesisSpec::uniform(g, {deg2rad(-20), deg2rad(20)});
  const Eigen::VectorXd b = desired_pattern(synth);
  const ComplexVec y = ls_beam_unnormalized(synth, b);
  const double r0 = ls_residual(synth, b, y);
  Rng r(1);
  for (int i = 0; i < 100; ++i) {
    EXPECT_GE(ls_residual(synth, b, y + random_unit(r, 16)), r0);
    EXPECT_GE(ls_residual(synth, b, y + 1e-2 * r.uniform(0, 1) * random_unit(r, 16)), r0 - 1e-9);
  }
}

TEST(LsBeam, CommSectorBeampattern) {
  const ArrayGeometry g = ArrayGeometry::nominal(16);
  const ComplexVec y = ls_beam(BeamSynthesisSpec::uniform(g, {deg2rad(30), deg2rad(50)}));
  EXPECT_GE(lin2db(beampattern(g, y, deg2rad(40))) - lin2db(beampattern(g, y, 0.0)), 10.0);
}

TEST(LsBeam, RejectsBadGrid) {
  const ArrayGeometry g = ArrayGeometry::nominal(16);
  BeamSynthesisSpec synth = BeamSynthesisSpec::uniform(g, {0.0, 0.1}, 10);
  EXPECT_THROW(ls_beam(synth), std::invalid_argument);
  synth = BeamSynthesisSpec::uniform(g, {0.0, 0.1});
  std::swap(synth.grid[3], synth.grid[4]);
  EXPECT_THROW(ls_beam(synth), std::invalid_argument);
}

TEST(Multibeam, EndpointsAndOracle) {
  Rng r(2);
  const ComplexVec yr = random_unit(r, 16), yc = random_unit(r, 16);
  EXPECT_LT((multibeam(yr, yc, {1.0, 0.3}, 2.0) - std::sqrt(2.0) * yr).norm(), 1e-12);
  EXPECT_LT((multibeam(yr, yc, {0.0, 0.0}, 1.0) - yc).norm(), 1e-12);
  const double rho = 0.5, phi = std::numbers::pi / 3;
  ComplexVec u(16);
  for (int k = 0; k < 16; ++k) u[k] = std::sqrt(rho) * yr[k] + std::sqrt(1 - rho) * std::polar(1.0, phi) * yc[k];
  const ComplexVec v = multibeam(yr, yc, {rho, phi}, 1.0);
  EXPECT_NEAR(v.squaredNorm(), 1.0, 1e-12);
  EXPECT_LT((v - u / u.norm()).norm(), 1e-12);
}

TEST(Multibeam, NormOnFullGrid) {
  Rng r(3);
  const ComplexVec yr = random_unit(r, 16), yc = random_unit(r, 16);
  for (int i = 0; i <= 20; ++i)
    for (int j = 0; j < 16; ++j) {
      const ComplexVec v = multibeam(yr, yc, {i / 20.0, 2 * std::numbers::pi * j / 16}, 1.0);
      EXPECT_NEAR(v.norm(), 1.0, 1e-12);
    }
}

TEST(Multibeam, Errors) {
  const ComplexVec y = ComplexVec::Ones(4) / 2.0;
  EXPECT_THROW(multibeam(y, -y, {0.5, 0.0}, 1.0), std::runtime_error);
  EXPECT_THROW(multibeam(y, y, {1.5, 0.0}, 1.0), std::invalid_argument);
  EXPECT_THROW(multibeam(y, ComplexVec::Ones(3), {0.5, 0.0}, 1.0), std::invalid_argument);
}

TEST(Maprt, AlphaHatTrivialCases) {
  const ArrayGeometry g = ArrayGeometry::nominal(16);
  Rng r(4);
  const ComplexVec y = random_unit(r, 16);
  EXPECT_EQ(maprt_alpha_hat(ComplexVec::Zero(16), 0.1, y, 1.0, 1.0, g), cplx(0.0));
  const ComplexVec z = sample_cn(r, 1.0, 16);
  EXPECT_LT(std::abs(maprt_alpha_hat(z, 0.1, y, 1.0, 1e-12, g)), 1e-9);
}

TEST(Maprt, LogLrMatchesBruteForceAndAlphaHatIsGridMinimal) {
  const isac::testing::MaprtOracleReport rep = isac::testing::check_maprt_oracle(6, 100, 1e-6);
  EXPECT_EQ(rep.instances, 100);
  EXPECT_EQ(rep.loglr_failures, 0) << "worst relative error " << rep.worst_loglr_rel;
  EXPECT_EQ(rep.alpha_failures, 0);
}

TEST(Maprt, LogLrZeroAndMonotone) {
  const ArrayGeometry g = ArrayGeometry::nominal(16);
  const std::vector<double> grid{0.1};
  Rng r(7);
  const ComplexVec y = random_unit(r, 16);
  EXPECT_EQ(maprt_loglr(ComplexVec::Zero(16), y, 1.0, 1.0, g, grid), 0.0);
  const ComplexVec a = steering_vector(g, 0.1);
  double prev = -1.0;
  for (int i = 1; i <= 10; ++i) {
    const double v = maprt_loglr(0.3 * i * a, y, 1.0, 1.0, g, grid);
    EXPECT_GT(v, prev);
    prev = v;
  }
}

TEST(Maprt, MatchedDirection) {
  const ArrayGeometry g = ArrayGeometry::nominal(16);
  const MaprtDetector det = MaprtDetector::uniform(g, {deg2rad(-20), deg2rad(20)});
  ASSERT_EQ(det.grid().size(), 2001u);
  const double th0 = det.grid()[1234];
  const cplx c(0.7, -1.1);
  const MaprtResult res = det.evaluate(ComplexVec(c * steering_vector(g, th0)));
  EXPECT_EQ(res.angle, th0);
  EXPECT_NEAR(res.statistic, std::norm(c) * 256.0, 1e-9);
  const MaprtResult free_fn = maprt_statistic(ComplexVec(c * steering_vector(g, th0)), g, det.grid());
  EXPECT_EQ(free_fn.angle, th0);
  EXPECT_THROW(MaprtDetector(g, {}), std::invalid_argument);
}

TEST(Maprt, GlobalPhaseInvariantAndBatchConsistent) {
  const ArrayGeometry g = ArrayGeometry::nominal(16);
  const MaprtDetector det = MaprtDetector::uniform(g, {deg2rad(-20), deg2rad(20)}, 401);
  Rng r(8);
  Eigen::MatrixXcd Z(16, 30);
  for (int i = 0; i < 30; ++i) Z.col(i) = sample_cn(r, 1.0, 16);
  const auto batch = det.evaluate(Z);
  for (int i = 0; i < 30; ++i) {
    const MaprtResult a = det.evaluate(ComplexVec(Z.col(i)));
    const MaprtResult b = det.evaluate(ComplexVec(std::polar(1.0, r.uniform(0, 6.28)) * Z.col(i)));
    EXPECT_NEAR(a.statistic, b.statistic, 1e-12 * a.statistic);
    EXPECT_EQ(a.angle, b.angle);
    EXPECT_NEAR(batch[static_cast<std::size_t>(i)].statistic, a.statistic, 1e-12 * a.statistic);
  }
}

TEST(MlComm, Detection) {
  const auto c = qam4_constellation();
  Rng r(9);
  for (int m = 0; m < 4; ++m) {
    const cplx kappa = sample_cn(r, 100.0);
    EXPECT_EQ(ml_comm_detect(kappa * c[static_cast<std::size_t>(m)], kappa, c), m);
  }
  EXPECT_EQ(ml_comm_detect(0.0, 1.0, c), 0);
  EXPECT_THROW(ml_comm_detect(0.0, 1.0, std::span<const cplx>{}), std::invalid_argument);
}
