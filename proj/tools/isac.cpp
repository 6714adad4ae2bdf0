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

// Command-line driver: train, eval, sweep, calibrate, beampattern.
//
// Exit codes: 0 success, 1 validation error, 2 runtime error.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "isac/config.hpp"
#include "isac/eval.hpp"
#include "isac/model.hpp"
#include "isac/training.hpp"

namespace fs = std::filesystem;
using namespace isac;

namespace {

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<double> omega_r;
  double rho = 1.0;
  double phi = 0.0;
  bool baseline = false;
  bool ae = false;
  bool impaired = false;
  std::optional<double> sigma_lambda_frac;
  std::optional<std::int64_t> trials;
  std::string out;
  std::string checkpoint;
  std::string omegas = "0,0.01,0.014,0.015,0.03,0.09,0.15,0.4,0.6,0.7,1";
  bool beampattern = false;
};

class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

ExperimentConfig resolve(const Options& o) {
  ExperimentConfig c = o.config_path.empty() ? ExperimentConfig{} : load_config(o.config_path);
  if (o.seed) {
    c.training.seed = *o.seed;
    c.evaluation.seed = *o.seed;
  }
  if (o.omega_r) c.training.omega_r = *o.omega_r;
  if (o.trials) c.evaluation.n_trials = *o.trials;
  if (o.sigma_lambda_frac) c.impairment.sigma_lambda_fraction = *o.sigma_lambda_frac;
  if (!o.out.empty()) {
    c.paths.checkpoint_dir = o.out;
    c.paths.results_dir = o.out;
  }
  c.validate();
  return c;
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ValidationError("bad number in list: '" + item + "'");
    }
  }
  if (out.empty()) throw ValidationError("empty list");
  return out;
}

std::string tag(double x) {
  std::ostringstream s;
  s << x;
  return s.str();
}

ArrayGeometry channel_geometry(const ExperimentConfig& c, bool impaired) {
  if (!impaired) return ArrayGeometry::nominal(c.scenario.num_antennas);
  return impaired_geometry(c.impairment.sigma_lambda_fraction, c.impairment.geometry_seed, c.scenario);
}

std::ofstream open_out(const fs::path& p) {
  fs::create_directories(p.parent_path());
  std::ofstream f(p);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  return f;
}

void check_omega(double w) {
  if (!(w >= 0.0 && w <= 1.0)) throw ValidationError("omega_r must lie in [0, 1], got " + tag(w));
}

void check_rho_phi(const Options& o) {
  if (!(o.rho >= 0.0 && o.rho <= 1.0)) throw ValidationError("rho must lie in [0, 1]");
  if (!(o.phi >= 0.0 && o.phi < 2.0 * std::numbers::pi)) throw ValidationError("phi must lie in [0, 2pi)");
}

IsacModel require_model(const Options& o, const ExperimentConfig& c) {
  if (o.checkpoint.empty()) throw ValidationError("a --checkpoint is required unless --baseline is given");
  return load_model(o.checkpoint, c.scenario);
}

void save_trained(const ExperimentConfig& c, double omega, const TrainingResult& r, const std::string& suffix) {
  const fs::path dir = c.paths.checkpoint_dir;
  fs::create_directories(dir);
  save_model(r.model, dir / ("ae_omega_" + tag(omega) + suffix + ".bin"));
  auto log = open_out(dir / ("train_log_omega_" + tag(omega) + suffix + ".csv"));
  write_training_log(log, r.log);
}

int cmd_train(const Options& o) {
  const ExperimentConfig c = resolve(o);
  check_omega(c.training.omega_r);
  const ArrayGeometry geom = channel_geometry(c, o.impaired);
  std::cerr << "training omega_r=" << c.training.omega_r << " (" << c.training.total_batches() << " batches)\n";
  const TrainingResult r = train(c.training, c.scenario, geom);
  save_trained(c, c.training.omega_r, r, o.impaired ? "_impaired" : "");
  return 0;
}

int cmd_eval(const Options& o) {
  const ExperimentConfig c = resolve(o);
  const ArrayGeometry geom = channel_geometry(c, o.impaired);
  const ArrayGeometry nominal = ArrayGeometry::nominal(c.scenario.num_antennas);
  TradeoffPoint p;
  ComplexVec beam;
  if (o.baseline) {
    check_rho_phi(o);
    p = sweep_baseline({{o.rho, o.phi}}, c.scenario, nominal, geom, c.evaluation).front();
    beam = BaselineSystem(c.scenario, nominal, {o.rho, o.phi}).beam();
  } else {
    const IsacModel model = require_model(o, c);
    p = evaluate_model(model, o.omega_r.value_or(c.training.omega_r), c.scenario, geom, c.evaluation);
    beam = beamformer(model);
  }
  const fs::path dir = c.paths.results_dir;
  auto out = open_out(dir / "results.csv");
  write_results_csv(out, {p});
  write_results_csv(std::cout, {p});
  if (o.beampattern) {
    auto bp = open_out(dir / "beampattern.csv");
    write_beampattern_csv(bp, geom, beam);
  }
  return 0;
}

int cmd_sweep(const Options& o) {
  if (o.ae == o.baseline) throw ValidationError("sweep needs exactly one of --ae or --baseline");
  const ExperimentConfig c = resolve(o);
  const fs::path dir = c.paths.results_dir;
  const std::string suffix = o.impaired ? "_impaired" : "";
  const ArrayGeometry geom = channel_geometry(c, o.impaired);

  if (o.baseline) {
    const auto points = sweep_baseline(default_rho_phi_grid(), c.scenario,
                                       ArrayGeometry::nominal(c.scenario.num_antennas), geom, c.evaluation);
    auto out = open_out(dir / ("baseline" + suffix + ".csv"));
    write_results_csv(out, points);
    return 0;
  }

  const std::vector<double> omegas = parse_list(o.omegas);
  for (double w : omegas) check_omega(w);
  fs::create_directories(dir);
  auto out = open_out(dir / ("ae" + suffix + ".csv"));
  write_results_csv_header(out);
  std::vector<AeSweepEntry> entries;
  for (std::size_t i = 0; i < omegas.size(); ++i) {
    TrainingPlan plan = c.training;
    plan.omega_r = omegas[i];
    plan.seed = c.training.seed + i;
    std::cerr << "training omega_r=" << omegas[i] << "\n";
    const TrainingResult r = train(plan, c.scenario, geom);
    save_trained(c, omegas[i], r, suffix);
    const TradeoffPoint p = evaluate_model(r.model, omegas[i], c.scenario, geom, c.evaluation);
    write_results_csv_row(out, p);
    out.flush();
    auto bp = open_out(dir / ("beampattern_omega_" + tag(omegas[i]) + suffix + ".csv"));
    write_beampattern_csv(bp, geom, beamformer(r.model));
    entries.push_back({omegas[i], r.model, p});
  }
  auto cal = open_out(dir / ("calibration" + suffix + ".csv"));
  write_calibration_csv(cal, uncertainty_calibration(entries));
  return 0;
}

int cmd_calibrate(const Options& o) {
  const ExperimentConfig c = resolve(o);
  const Rng rng = Rng(c.evaluation.seed).derive("calibration");
  CalibrationResult r;
  if (o.baseline) {
    check_rho_phi(o);
    const BaselineSystem s(c.scenario, ArrayGeometry::nominal(c.scenario.num_antennas), {o.rho, o.phi});
    r = calibrate(s, c.scenario, c.evaluation.target_pfa, c.evaluation.n_calibration, rng);
  } else {
    const AeSystem s(require_model(o, c));
    r = calibrate(s, c.scenario, c.evaluation.target_pfa, c.evaluation.n_calibration, rng);
  }
  auto out = open_out(fs::path(c.paths.results_dir) / "threshold.csv");
  for (std::ostream* s : {static_cast<std::ostream*>(&out), static_cast<std::ostream*>(&std::cout)}) {
    s->precision(17);
    *s << "threshold,target_pfa,achieved_pfa,n_calibration_trials\n"
       << r.threshold << ',' << r.target_pfa << ',' << r.achieved_pfa << ',' << r.n_calibration_trials << '\n';
  }
  return 0;
}

int cmd_beampattern(const Options& o) {
  const ExperimentConfig c = resolve(o);
  const ArrayGeometry geom = channel_geometry(c, o.impaired);
  ComplexVec beam;
  if (o.baseline) {
    check_rho_phi(o);
    beam = BaselineSystem(c.scenario, ArrayGeometry::nominal(c.scenario.num_antennas), {o.rho, o.phi}).beam();
  } else {
    beam = beamformer(require_model(o, c));
  }
  auto out = open_out(fs::path(c.paths.results_dir) / "beampattern.csv");
  write_beampattern_csv(out, geom, beam);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"End-to-end ISAC autoencoder workbench"};
  app.require_subcommand(1);
  Options o;

  const auto common = [&o](CLI::App* s) {
    s->add_option("--config", o.config_path, "YAML experiment config")->check(CLI::ExistingFile);
    s->add_option("--seed", o.seed, "root seed (training and evaluation)");
    s->add_option("--out", o.out, "output directory (checkpoints and results)");
    s->add_flag("--impaired", o.impaired, "use the perturbed array geometry");
    s->add_option("--sigma-lambda-frac", o.sigma_lambda_frac, "gap perturbation std as a fraction of lambda");
  };
  const auto system = [&o](CLI::App* s) {
    s->add_flag("--baseline", o.baseline, "LS multibeam + MAPRT + ML benchmark");
    s->add_option("--checkpoint", o.checkpoint, "trained autoencoder checkpoint");
    s->add_option("--rho", o.rho, "multibeam power split");
    s->add_option("--phi", o.phi, "multibeam phase [rad]");
  };

  CLI::App* train = app.add_subcommand("train", "train one autoencoder");
  common(train);
  train->add_option("--omega-r", o.omega_r, "radar loss weight in [0, 1]");

  CLI::App* eval = app.add_subcommand("eval", "evaluate one system");
  common(eval);
  system(eval);
  eval->add_option("--omega-r", o.omega_r, "label for the results row");
  eval->add_option("--trials", o.trials, "test scenes");
  eval->add_flag("--beampattern", o.beampattern, "also write beampattern.csv");

  CLI::App* sweep = app.add_subcommand("sweep", "trade-off sweep");
  common(sweep);
  sweep->add_flag("--ae", o.ae, "train and evaluate one autoencoder per omega");
  sweep->add_flag("--baseline", o.baseline, "evaluate the (rho, phi) grid");
  sweep->add_option("--omegas", o.omegas, "comma-separated omega_r values");
  sweep->add_option("--trials", o.trials, "test scenes per point");

  CLI::App* calib = app.add_subcommand("calibrate", "detection threshold at the target Pfa");
  common(calib);
  system(calib);

  CLI::App* bp = app.add_subcommand("beampattern", "transmit beampattern CSV");
  common(bp);
  system(bp);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (train->parsed()) return cmd_train(o);
    if (eval->parsed()) return cmd_eval(o);
    if (sweep->parsed()) return cmd_sweep(o);
    if (calib->parsed()) return cmd_calibrate(o);
    if (bp->parsed()) return cmd_beampattern(o);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
