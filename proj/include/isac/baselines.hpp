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
#include <span>
#include <vector>

#include "isac/channels.hpp"
#include "isac/signal.hpp"

namespace isac {

// Gray-labelled 4-QAM: bit 0 selects the sign of the real part, bit 1 the
// imaginary part. m = 0 maps to (1 + j)/sqrt(2).
cplx qam4_map(int m);
std::array<cplx, 4> qam4_constellation();

struct BeamSynthesisSpec {
  std::vector<double> grid;  // strictly increasing, radians
  AngleRange sector;
  ArrayGeometry geometry;

  // 1-degree grid over [-90, 90] degrees (181 points).
  static BeamSynthesisSpec uniform(const ArrayGeometry& geom, AngleRange sector, int num_points = 181);
};

inline constexpr double kLsRegularization = 1e-9;

// Least-squares beampattern fit: argmin_y ||b - A^T y||^2 with b_i = K inside
// the sector and 0 outside, solved as (A* A^T + eps I)^-1 A* b.
ComplexVec ls_beam_unnormalized(const BeamSynthesisSpec& synth, const Eigen::VectorXd& desired);
Eigen::VectorXd desired_pattern(const BeamSynthesisSpec& synth);
// Unit-norm LS beam.
ComplexVec ls_beam(const BeamSynthesisSpec& synth);
double ls_residual(const BeamSynthesisSpec& synth, const Eigen::VectorXd& desired, const ComplexVec& y);

struct MultibeamParams {
  double rho = 1.0;  // [0, 1]
  double phi = 0.0;  // [0, 2 pi)
};

// sqrt(E) (sqrt(rho) y_r + sqrt(1-rho) e^{j phi} y_c) / ||.||
ComplexVec multibeam(const ComplexVec& y_radar, const ComplexVec& y_comm, MultibeamParams params,
                     double energy_budget);

// Closed-form gain estimate minimizing ||z - alpha a_rx a_tx^T y||^2 / N0 + |alpha|^2 / sigma_r^2.
cplx maprt_alpha_hat(const ComplexVec& z_r, double theta, const ComplexVec& y, double noise_psd,
                     double radar_gain_var, const ArrayGeometry& geom);

struct MaprtResult {
  double statistic = 0.0;  // max_theta |a^H(theta) z|^2
  double angle = 0.0;      // grid argmax
};

// Detection statistic over a fixed angle grid. Holds the grid steering matrix
// so repeated evaluation is a single matrix product.
class MaprtDetector {
 public:
  MaprtDetector(const ArrayGeometry& geom, std::vector<double> grid);
  // 2001-point uniform grid over the range.
  static MaprtDetector uniform(const ArrayGeometry& geom, AngleRange range, int num_points = 2001);

  MaprtResult evaluate(const ComplexVec& z_r) const;
  // Column-wise statistics for a K x B block.
  std::vector<MaprtResult> evaluate(const Eigen::MatrixXcd& z_r) const;

  const std::vector<double>& grid() const { return grid_; }
  // Conjugated steering rows: (grid x K), row i = a^H(theta_i).
  const Eigen::MatrixXcd& projector() const { return projector_; }

 private:
  std::vector<double> grid_;
  Eigen::MatrixXcd projector_;
};

MaprtResult maprt_statistic(const ComplexVec& z_r, const ArrayGeometry& geom, const std::vector<double>& grid);

// Log MAP ratio after substituting alpha_hat: the grid maximum over theta of
// |a^T y|^2 |a^H z|^2 / (N0 (K |a^T y|^2 + N0 / sigma_r^2)).
double maprt_loglr(const ComplexVec& z_r, const ComplexVec& y, double noise_psd, double radar_gain_var,
                   const ArrayGeometry& geom, const std::vector<double>& grid);

// argmin_m |z - kappa x_m|^2, ties to the lowest index.
int ml_comm_detect(cplx z, cplx kappa, std::span<const cplx> constellation);

}  // namespace isac
