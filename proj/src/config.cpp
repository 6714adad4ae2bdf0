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

#include "isac/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace isac {
namespace {

void check_keys(const YAML::Node& node, const std::string& section, const std::set<std::string>& allowed) {
  if (!node.IsMap()) throw ConfigError("config: section '" + section + "' must be a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) throw ConfigError("config: unknown key '" + section + "." + key + "'");
  }
}

template <class T>
void read(const YAML::Node& node, const std::string& section, const char* key, T& out) {
  const YAML::Node v = node[key];
  if (!v) return;
  try {
    out = v.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError("config: bad value for '" + section + "." + key + "'");
  }
}

void read_range(const YAML::Node& node, const std::string& section, const char* key, AngleRange& out) {
  const YAML::Node v = node[key];
  if (!v) return;
  if (!v.IsSequence() || v.size() != 2) throw ConfigError("config: '" + section + "." + key + "' must be [min, max]");
  try {
    out = {v[0].as<double>(), v[1].as<double>()};
  } catch (const YAML::Exception&) {
    throw ConfigError("config: bad value for '" + section + "." + key + "'");
  }
}

void read_range_deg(const YAML::Node& node, const std::string& section, const char* key, AngleRange& out) {
  if (!node[key]) return;
  AngleRange deg;
  read_range(node, section, key, deg);
  out = {deg2rad(deg.min), deg2rad(deg.max)};
}

void emit_range(YAML::Emitter& e, const char* key, AngleRange r) {
  e << YAML::Key << key << YAML::Value << YAML::Flow << YAML::BeginSeq << r.min << r.max << YAML::EndSeq;
}

}  // namespace

void ExperimentConfig::validate() const {
  try {
    scenario.validate();
    training.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (evaluation.n_trials < 1) throw ConfigError("config: evaluation.n_trials must be positive");
  if (!(evaluation.target_pfa > 0.0 && evaluation.target_pfa < 1.0))
    throw ConfigError("config: evaluation.pfa_target must lie in (0, 1)");
  if (static_cast<double>(evaluation.n_calibration) * evaluation.target_pfa < 100.0)
    throw ConfigError("config: evaluation.n_calibration * pfa_target must be at least 100");
  if (!(impairment.sigma_lambda_fraction >= 0.0))
    throw ConfigError("config: impairment.sigma_lambda_fraction must be nonnegative");
  if (paths.checkpoint_dir.empty() || paths.results_dir.empty()) throw ConfigError("config: empty output directory");
}

ExperimentConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("config: parse error: ") + e.what());
  }
  ExperimentConfig c;
  if (root.IsNull()) return c;
  check_keys(root, "<root>", {"scenario", "training", "evaluation", "impairment", "paths"});

  if (const YAML::Node s = root["scenario"]) {
    check_keys(s, "scenario",
               {"num_antennas", "modulation_size", "energy_budget", "noise_psd", "radar_snr_db", "comm_snr_db",
                "target_range_rad", "rx_range_rad", "target_range_deg", "rx_range_deg", "target_prior"});
    for (const auto& [rad, deg] : {std::pair{"target_range_rad", "target_range_deg"}, std::pair{"rx_range_rad", "rx_range_deg"}})
      if (s[rad] && s[deg]) throw ConfigError(std::string("config: give only one of scenario.") + rad + " and " + deg);
    auto& o = c.scenario;
    read(s, "scenario", "num_antennas", o.num_antennas);
    read(s, "scenario", "modulation_size", o.modulation_size);
    read(s, "scenario", "energy_budget", o.energy_budget);
    read(s, "scenario", "noise_psd", o.noise_psd);
    read(s, "scenario", "radar_snr_db", o.radar_snr_db);
    read(s, "scenario", "comm_snr_db", o.comm_snr_db);
    read_range(s, "scenario", "target_range_rad", o.target_range);
    read_range(s, "scenario", "rx_range_rad", o.rx_range);
    read_range_deg(s, "scenario", "target_range_deg", o.target_range);
    read_range_deg(s, "scenario", "rx_range_deg", o.rx_range);
    read(s, "scenario", "target_prior", o.target_prior);
  }
  if (const YAML::Node t = root["training"]) {
    check_keys(t, "training", {"omega_r", "batch_size", "learning_rate", "total_samples", "stage_fractions", "seed"});
    auto& o = c.training;
    read(t, "training", "omega_r", o.omega_r);
    read(t, "training", "batch_size", o.batch_size);
    read(t, "training", "learning_rate", o.learning_rate);
    read(t, "training", "total_samples", o.total_samples);
    if (const YAML::Node f = t["stage_fractions"]) {
      if (!f.IsSequence() || f.size() != 3) throw ConfigError("config: 'training.stage_fractions' needs 3 values");
      for (std::size_t i = 0; i < 3; ++i) o.stage_fractions[i] = f[i].as<double>();
    }
    read(t, "training", "seed", o.seed);
  }
  if (const YAML::Node e = root["evaluation"]) {
    check_keys(e, "evaluation", {"n_trials", "n_calibration", "pfa_target", "seed"});
    auto& o = c.evaluation;
    read(e, "evaluation", "n_trials", o.n_trials);
    read(e, "evaluation", "n_calibration", o.n_calibration);
    read(e, "evaluation", "pfa_target", o.target_pfa);
    read(e, "evaluation", "seed", o.seed);
  }
  if (const YAML::Node i = root["impairment"]) {
    check_keys(i, "impairment", {"sigma_lambda_fraction", "geometry_seed"});
    read(i, "impairment", "sigma_lambda_fraction", c.impairment.sigma_lambda_fraction);
    read(i, "impairment", "geometry_seed", c.impairment.geometry_seed);
  }
  if (const YAML::Node p = root["paths"]) {
    check_keys(p, "paths", {"checkpoint_dir", "results_dir"});
    read(p, "paths", "checkpoint_dir", c.paths.checkpoint_dir);
    read(p, "paths", "results_dir", c.paths.results_dir);
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string dump_config(const ExperimentConfig& c) {
  YAML::Emitter e;
  e.SetDoublePrecision(17);
  e << YAML::BeginMap;

  e << YAML::Key << "scenario" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "num_antennas" << YAML::Value << c.scenario.num_antennas;
  e << YAML::Key << "modulation_size" << YAML::Value << c.scenario.modulation_size;
  e << YAML::Key << "energy_budget" << YAML::Value << c.scenario.energy_budget;
  e << YAML::Key << "noise_psd" << YAML::Value << c.scenario.noise_psd;
  e << YAML::Key << "radar_snr_db" << YAML::Value << c.scenario.radar_snr_db;
  e << YAML::Key << "comm_snr_db" << YAML::Value << c.scenario.comm_snr_db;
  emit_range(e, "target_range_rad", c.scenario.target_range);
  emit_range(e, "rx_range_rad", c.scenario.rx_range);
  e << YAML::Key << "target_prior" << YAML::Value << c.scenario.target_prior;
  e << YAML::EndMap;

  e << YAML::Key << "training" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "omega_r" << YAML::Value << c.training.omega_r;
  e << YAML::Key << "batch_size" << YAML::Value << c.training.batch_size;
  e << YAML::Key << "learning_rate" << YAML::Value << c.training.learning_rate;
  e << YAML::Key << "total_samples" << YAML::Value << c.training.total_samples;
  e << YAML::Key << "stage_fractions" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (double f : c.training.stage_fractions) e << f;
  e << YAML::EndSeq;
  e << YAML::Key << "seed" << YAML::Value << c.training.seed;
  e << YAML::EndMap;

  e << YAML::Key << "evaluation" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "n_trials" << YAML::Value << c.evaluation.n_trials;
  e << YAML::Key << "n_calibration" << YAML::Value << c.evaluation.n_calibration;
  e << YAML::Key << "pfa_target" << YAML::Value << c.evaluation.target_pfa;
  e << YAML::Key << "seed" << YAML::Value << c.evaluation.seed;
  e << YAML::EndMap;

  e << YAML::Key << "impairment" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "sigma_lambda_fraction" << YAML::Value << c.impairment.sigma_lambda_fraction;
  e << YAML::Key << "geometry_seed" << YAML::Value << c.impairment.geometry_seed;
  e << YAML::EndMap;

  e << YAML::Key << "paths" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "checkpoint_dir" << YAML::Value << c.paths.checkpoint_dir;
  e << YAML::Key << "results_dir" << YAML::Value << c.paths.results_dir;
  e << YAML::EndMap;

  e << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

void save_config(const std::filesystem::path& path, const ExperimentConfig& cfg) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("config: cannot write " + path.string());
  out << dump_config(cfg);
}

}  // namespace isac
