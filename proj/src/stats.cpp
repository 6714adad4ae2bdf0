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

#include "isac/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <boost/math/distributions/binomial.hpp>

namespace isac::stats {

CountInterval binomial_interval(std::int64_t n, double p, double confidence) {
  if (n <= 0 || !(p >= 0.0 && p <= 1.0) || !(confidence > 0.0 && confidence < 1.0))
    throw std::invalid_argument("binomial_interval: invalid arguments");
  const boost::math::binomial_distribution<double> dist(static_cast<double>(n), p);
  const double tail = (1.0 - confidence) / 2.0;
  // Smallest lo with P(X < lo) <= tail, largest hi with P(X > hi) <= tail.
  auto lo = static_cast<std::int64_t>(std::floor(boost::math::quantile(dist, tail)));
  while (lo > 0 && boost::math::cdf(dist, static_cast<double>(lo - 1)) > tail) --lo;
  while (lo < n && boost::math::cdf(dist, static_cast<double>(lo)) <= tail) ++lo;
  auto hi = static_cast<std::int64_t>(std::ceil(boost::math::quantile(boost::math::complement(dist, tail))));
  while (hi < n && boost::math::cdf(boost::math::complement(dist, static_cast<double>(hi))) > tail) ++hi;
  while (hi > 0 && boost::math::cdf(boost::math::complement(dist, static_cast<double>(hi - 1))) <= tail) --hi;
  return {lo, hi};
}

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
  std::vector<double> x(a.begin(), a.end());
  std::vector<double> y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double n = static_cast<double>(x.size());
  const double m = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m));
  }
  const double ne = n * m / (n + m);
  const double lambda = (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * d;
  // Q_KS(lambda) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2)
  double p = 0.0;
  if (lambda < 1e-3) {
    p = 1.0;
  } else {
    double sign = 1.0;
    for (int k = 1; k <= 200; ++k) {
      const double term = sign * std::exp(-2.0 * k * k * lambda * lambda);
      p += term;
      if (std::abs(term) < 1e-12) break;
      sign = -sign;
    }
    p = std::clamp(2.0 * p, 0.0, 1.0);
  }
  return {d, p};
}

namespace {

std::vector<double> ranks(std::span<const double> v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

}  // namespace

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("spearman: need two equal-length samples");
  const std::vector<double> rx = ranks(x);
  const std::vector<double> ry = ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace isac::stats
