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

#include "isac/signal.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace isac {

ArrayGeometry::ArrayGeometry(int num_elements, double wavelength, std::vector<double> gaps)
    : num_elements_(num_elements), wavelength_(wavelength), gaps_(std::move(gaps)) {
  if (num_elements_ < 1) throw std::invalid_argument("ArrayGeometry: num_elements must be positive");
  if (!(wavelength_ > 0.0) || !std::isfinite(wavelength_))
    throw std::invalid_argument("ArrayGeometry: wavelength must be positive");
  if (gaps_.size() != static_cast<std::size_t>(num_elements_ - 1))
    throw std::invalid_argument("ArrayGeometry: expected " + std::to_string(num_elements_ - 1) +
                                " gaps, got " + std::to_string(gaps_.size()));
  positions_.assign(num_elements_, 0.0);
  for (int k = 1; k < num_elements_; ++k) {
    const double d = gaps_[k - 1];
    if (!(d > 0.0) || !std::isfinite(d)) throw std::invalid_argument("ArrayGeometry: gaps must be positive");
    positions_[k] = positions_[k - 1] + d;
  }
}

ArrayGeometry ArrayGeometry::nominal(int num_elements, double wavelength) {
  return ArrayGeometry(num_elements, wavelength,
                       std::vector<double>(num_elements > 0 ? num_elements - 1 : 0, wavelength / 2.0));
}

bool ArrayGeometry::is_nominal() const {
  for (double d : gaps_)
    if (d != wavelength_ / 2.0) return false;
  return true;
}

ComplexVec steering_vector(const ArrayGeometry& geom, double angle) {
  const int K = geom.num_elements();
  const double s = std::sin(angle);
  ComplexVec a(K);
  for (int k = 0; k < K; ++k)
    a[k] = std::polar(1.0, -2.0 * std::numbers::pi * geom.positions()[k] * s / geom.wavelength());
  return a;
}

Eigen::MatrixXcd steering_matrix(const ArrayGeometry& geom, const std::vector<double>& angles) {
  Eigen::MatrixXcd A(geom.num_elements(), static_cast<Eigen::Index>(angles.size()));
  for (std::size_t i = 0; i < angles.size(); ++i) A.col(static_cast<Eigen::Index>(i)) = steering_vector(geom, angles[i]);
  return A;
}

double beampattern(const ArrayGeometry& geom, const ComplexVec& signal, double angle) {
  if (signal.size() != geom.num_elements())
    throw std::invalid_argument("beampattern: signal length " + std::to_string(signal.size()) +
                                " != num_elements " + std::to_string(geom.num_elements()));
  // a^T y, not a^H y
  return std::norm(steering_vector(geom, angle).cwiseProduct(signal).sum());
}

cplx sample_cn(Rng& rng, double variance) {
  const double s = std::sqrt(variance / 2.0);
  const double re = rng.normal(0.0, s);
  const double im = rng.normal(0.0, s);
  return {re, im};
}

ComplexVec sample_cn(Rng& rng, double variance, std::size_t n) {
  ComplexVec out(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = sample_cn(rng, variance);
  return out;
}

ArrayGeometry perturb_geometry(Rng& rng, int num_elements, double wavelength, double sigma_lambda) {
  if (sigma_lambda < 0.0) throw std::invalid_argument("perturb_geometry: sigma must be nonnegative");
  std::vector<double> gaps(num_elements > 0 ? num_elements - 1 : 0);
  for (double& d : gaps) {
    do {
      d = rng.normal(wavelength / 2.0, sigma_lambda);
    } while (d <= 0.0);
  }
  return ArrayGeometry(num_elements, wavelength, std::move(gaps));
}

}  // namespace isac
