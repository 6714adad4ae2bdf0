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
#include <filesystem>
#include <string>

#include "isac/channels.hpp"
#include "isac/eval.hpp"
#include "isac/training.hpp"

namespace isac {

struct ImpairmentConfig {
  double sigma_lambda_fraction = 1.0 / 30.0;
  std::uint64_t geometry_seed = 2024;

  bool operator==(const ImpairmentConfig&) const = default;
};

struct PathConfig {
  std::string checkpoint_dir = "checkpoints";
  std::string results_dir = "results";

  bool operator==(const PathConfig&) const = default;
};

struct ExperimentConfig {
  ScenarioConfig scenario;
  TrainingPlan training;
  EvalSettings evaluation;
  ImpairmentConfig impairment;
  PathConfig paths;

  void validate() const;
  bool operator==(const ExperimentConfig&) const = default;
};

// Thrown for malformed files, unknown keys and out-of-range values.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// YAML with sections scenario / training / evaluation / impairment / paths.
// Missing keys keep their defaults; unknown keys are rejected. Angle ranges
// may be given in degrees (*_deg) or radians (*_rad); dump_config writes
// radians so that load(save(c)) == c exactly.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);
std::string dump_config(const ExperimentConfig& cfg);
void save_config(const std::filesystem::path& path, const ExperimentConfig& cfg);

}  // namespace isac
