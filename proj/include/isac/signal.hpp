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

#include <complex>
#include <cstddef>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "isac/rng.hpp"

namespace isac {

using cplx = std::complex<double>;
using ComplexVec = Eigen::VectorXcd;

inline double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / std::numbers::pi; }
inline double db2lin(double db) { return std::pow(10.0, db / 10.0); }
inline double lin2db(double lin) { return 10.0 * std::log10(lin); }

// Uniform or perturbed linear array. Element 0 sits at the origin and element k
// at the cumulative sum of the first k gaps.
class ArrayGeometry {
 public:
  ArrayGeometry(int num_elements, double wavelength, std::vector<double> gaps);

  // Half-wavelength spaced array.
  static ArrayGeometry nominal(int num_elements, double wavelength = 1.0);

  int num_elements() const { return num_elements_; }
  double wavelength() const { return wavelength_; }
  const std::vector<double>& gaps() const { return gaps_; }
  const std::vector<double>& positions() const { return positions_; }
  bool is_nominal() const;

  bool operator==(const ArrayGeometry&) const = default;

 private:
  int num_elements_;
  double wavelength_;
  std::vector<double> gaps_;
  std::vector<double> positions_;
};

// [a(angle)]_k = exp(-j 2 pi p_k sin(angle) / lambda). Transmit and receive
// arrays are the same physical array, so this serves both a_tx and a_rx.
ComplexVec steering_vector(const ArrayGeometry& geom, double angle);

// Columns are steering vectors for each angle (K x angles.size()).
Eigen::MatrixXcd steering_matrix(const ArrayGeometry& geom, const std::vector<double>& angles);

// Radiated energy |a(angle)^T y|^2 (linear).
double beampattern(const ArrayGeometry& geom, const ComplexVec& signal, double angle);

// Circularly-symmetric complex Gaussian, real and imaginary parts N(0, variance/2).
ComplexVec sample_cn(Rng& rng, double variance, std::size_t n);
cplx sample_cn(Rng& rng, double variance);

// Gaps drawn i.i.d. N(lambda/2, sigma^2); nonpositive draws are redrawn.
ArrayGeometry perturb_geometry(Rng& rng, int num_elements, double wavelength, double sigma_lambda);

}  // namespace isac
