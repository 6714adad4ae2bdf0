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

#include "isac/baselines.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace isac {

cplx qam4_map(int m) {
  if (m < 0 || m > 3) throw std::out_of_range("qam4_map: message must be in {0,1,2,3}, got " + std::to_string(m));
  const double s = 1.0 / std::numbers::sqrt2;
  return {(m & 1) ? -s : s, (m & 2) ? -s : s};
}

std::array<cplx, 4> qam4_constellation() { return {qam4_map(0), qam4_map(1), qam4_map(2), qam4_map(3)}; }

BeamSynthesisSpec BeamSynthesisSpec::uniform(const ArrayGeometry& geom, AngleRange sector, int num_points) {
  if (num_points < 2) throw std::invalid_argument("BeamSynthesisSpec: need at least two grid points");
  std::vector<double> grid(static_cast<std::size_t>(num_points));
  const double half_pi = std::numbers::pi / 2.0;
  for (int i = 0; i < num_points; ++i) grid[static_cast<std::size_t>(i)] = -half_pi + std::numbers::pi * i / (num_points - 1);
  return {std::move(grid), sector, geom};
}

Eigen::VectorXd desired_pattern(const BeamSynthesisSpec& synth) {
  Eigen::VectorXd b(static_cast<Eigen::Index>(synth.grid.size()));
  const double K = synth.geometry.num_elements();
  // Tolerance keeps sector edges that land on the grid inside despite rounding.
  constexpr double tol = 1e-9;
  for (std::size_t i = 0; i < synth.grid.size(); ++i) {
    const double th = synth.grid[i];
    b[static_cast<Eigen::Index>(i)] = (th >= synth.sector.min - tol && th <= synth.sector.max + tol) ? K : 0.0;
  }
  return b;
}

ComplexVec ls_beam_unnormalized(const BeamSynthesisSpec& synth, const Eigen::VectorXd& desired) {
  const auto N = static_cast<Eigen::Index>(synth.grid.size());
  const int K = synth.geometry.num_elements();
  if (N < K) throw std::invalid_argument("ls_beam: grid must have at least K points");
  for (std::size_t i = 1; i < synth.grid.size(); ++i)
    if (!(synth.grid[i] > synth.grid[i - 1])) throw std::invalid_argument("ls_beam: grid must be strictly increasing");
  if (desired.size() != N) throw std::invalid_argument("ls_beam: desired pattern length mismatch");

  const Eigen::MatrixXcd A = steering_matrix(synth.geometry, synth.grid);  // K x N
  Eigen::MatrixXcd normal = A.conjugate() * A.transpose();
  normal.diagonal().array() += kLsRegularization;
  const Eigen::VectorXcd rhs = A.conjugate() * desired.cast<cplx>();
  Eigen::LDLT<Eigen::MatrixXcd> ldlt(normal);
  if (ldlt.info() != Eigen::Success || !(ldlt.rcond() > 1e-15))
    throw std::runtime_error("ls_beam: normal matrix is singular");
  return ldlt.solve(rhs);
}

ComplexVec ls_beam(const BeamSynthesisSpec& synth) {
  const ComplexVec y = ls_beam_unnormalized(synth, desired_pattern(synth));
  const double n = y.norm();
  if (!(n > 0.0)) throw std::runtime_error("ls_beam: zero solution (empty sector?)");
  return y / n;
}

double ls_residual(const BeamSynthesisSpec& synth, const Eigen::VectorXd& desired, const ComplexVec& y) {
  const Eigen::MatrixXcd A = steering_matrix(synth.geometry, synth.grid);
  return (desired.cast<cplx>() - A.transpose() * y).squaredNorm();
}

ComplexVec multibeam(const ComplexVec& y_radar, const ComplexVec& y_comm, MultibeamParams p, double energy_budget) {
  if (y_radar.size() != y_comm.size()) throw std::invalid_argument("multibeam: beam length mismatch");
  if (!(p.rho >= 0.0 && p.rho <= 1.0)) throw std::invalid_argument("multibeam: rho must lie in [0, 1]");
  const ComplexVec mix = std::sqrt(p.rho) * y_radar + std::sqrt(1.0 - p.rho) * std::polar(1.0, p.phi) * y_comm;
  const double n = mix.norm();
  if (n < 1e-12) throw std::runtime_error("multibeam: beams cancel (norm below 1e-12)");
  return (std::sqrt(energy_budget) / n) * mix;
}

cplx maprt_alpha_hat(const ComplexVec& z_r, double theta, const ComplexVec& y, double noise_psd,
                     double radar_gain_var, const ArrayGeometry& geom) {
  const ComplexVec a = steering_vector(geom, theta);
  const int K = geom.num_elements();
  const cplx gain = (a.transpose() * y)(0);  // a_tx^T y
  const cplx proj = a.dot(z_r);              // a_rx^H z
  return std::conj(gain) * proj / (K * std::norm(gain) + noise_psd / radar_gain_var);
}

MaprtDetector::MaprtDetector(const ArrayGeometry& geom, std::vector<double> grid) : grid_(std::move(grid)) {
  if (grid_.empty()) throw std::invalid_argument("MaprtDetector: empty angle grid");
  projector_ = steering_matrix(geom, grid_).adjoint();
}

MaprtDetector MaprtDetector::uniform(const ArrayGeometry& geom, AngleRange range, int num_points) {
  if (num_points < 1) throw std::invalid_argument("MaprtDetector: empty angle grid");
  std::vector<double> grid(static_cast<std::size_t>(num_points));
  for (int i = 0; i < num_points; ++i)
    grid[static_cast<std::size_t>(i)] =
        num_points == 1 ? range.min : range.min + (range.max - range.min) * i / (num_points - 1);
  return MaprtDetector(geom, std::move(grid));
}

MaprtResult MaprtDetector::evaluate(const ComplexVec& z_r) const {
  if (z_r.size() != projector_.cols()) throw std::invalid_argument("MaprtDetector: observation length mismatch");
  const Eigen::VectorXd p = (projector_ * z_r).cwiseAbs2();
  Eigen::Index best = 0;
  const double stat = p.maxCoeff(&best);
  return {stat, grid_[static_cast<std::size_t>(best)]};
}

std::vector<MaprtResult> MaprtDetector::evaluate(const Eigen::MatrixXcd& z_r) const {
  if (z_r.rows() != projector_.cols()) throw std::invalid_argument("MaprtDetector: observation length mismatch");
  const Eigen::MatrixXd p = (projector_ * z_r).cwiseAbs2();
  std::vector<MaprtResult> out(static_cast<std::size_t>(z_r.cols()));
  for (Eigen::Index c = 0; c < p.cols(); ++c) {
    Eigen::Index best = 0;
    const double stat = p.col(c).maxCoeff(&best);
    out[static_cast<std::size_t>(c)] = {stat, grid_[static_cast<std::size_t>(best)]};
  }
  return out;
}

MaprtResult maprt_statistic(const ComplexVec& z_r, const ArrayGeometry& geom, const std::vector<double>& grid) {
  return MaprtDetector(geom, grid).evaluate(z_r);
}

double maprt_loglr(const ComplexVec& z_r, const ComplexVec& y, double noise_psd, double radar_gain_var,
                   const ArrayGeometry& geom, const std::vector<double>& grid) {
  if (grid.empty()) throw std::invalid_argument("maprt_loglr: empty angle grid");
  const int K = geom.num_elements();
  double best = -std::numeric_limits<double>::infinity();
  for (double th : grid) {
    const ComplexVec a = steering_vector(geom, th);
    const double g2 = std::norm((a.transpose() * y)(0));
    const double p2 = std::norm(a.dot(z_r));
    const double val = g2 * p2 / (noise_psd * (K * g2 + noise_psd / radar_gain_var));
    best = std::max(best, val);
  }
  return best;
}

int ml_comm_detect(cplx z, cplx kappa, std::span<const cplx> constellation) {
  if (constellation.empty()) throw std::invalid_argument("ml_comm_detect: empty constellation");
  int best = 0;
  double best_d = std::norm(z - kappa * constellation[0]);
  for (std::size_t m = 1; m < constellation.size(); ++m) {
    const double d = std::norm(z - kappa * constellation[m]);
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(m);
    }
  }
  return best;
}

}  // namespace isac
