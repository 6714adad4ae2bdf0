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
#include <random>
#include <string_view>

namespace isac {

// Seeded random stream. Identical (seed, stream) pairs reproduce identical draws.
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  double uniform(double lo, double hi);
  double normal(double mean, double stddev);
  int uniform_int(int lo, int hi);  // inclusive
  bool bernoulli(double p);

  std::mt19937_64& engine() { return engine_; }

  // Independent child stream; does not advance this generator.
  Rng derive(std::string_view name, std::uint64_t index = 0) const;

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
};

// Stream id for a named component: splitmix-mixed FNV-1a of the name and index.
std::uint64_t stream_id(std::string_view name, std::uint64_t index = 0);

}  // namespace isac
