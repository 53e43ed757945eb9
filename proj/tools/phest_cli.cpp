// phest: parametric channel estimation for uplink OFDMA with hopping pilots
// Copyright (C) 2026 the phest authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include <algorithm>
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "phest/harness.hpp"

namespace {

struct CommonOptions {
  std::string preset;
  std::string config_path;
  std::vector<double> snr_list;
  double doppler_hz = -1.0;
  int n_t = 0;
  int n_sch = 0;
  std::string estimator;
  std::string esprit;
  int beta = -1;
  int nu = 0;
  int trials = 0;
  long long seed = -1;
  std::string profile;
  int threads = 0;
};

void add_common_options(CLI::App* cmd, CommonOptions* opt) {
  cmd->add_option("--preset", opt->preset, "Sweep preset: fig1, fig2 or fig3");
  cmd->add_option("--config", opt->config_path, "Experiment config file (key value pairs)");
  cmd->add_option("--snr-list", opt->snr_list, "SNR points in dB (comma separated)")
      ->delimiter(',');
  cmd->add_option("--doppler-hz", opt->doppler_hz, "Maximum Doppler in Hz");
  cmd->add_option("--n-t", opt->n_t, "Observed OFDMA symbols per window");
  cmd->add_option("--n-sch", opt->n_sch, "Allocated subchannels (6 tiles each)");
  cmd->add_option("--estimator", opt->estimator, "Estimator: ph, ll or both")
      ->check(CLI::IsMember({"ph", "ll", "both"}));
  cmd->add_option("--esprit", opt->esprit, "Shift-operator criterion: ls or tls")
      ->check(CLI::IsMember({"ls", "tls"}));
  cmd->add_option("--beta", opt->beta, "Capturing window half-width (0..5)");
  cmd->add_option("--nu", opt->nu, "Hopping offset: +3 (user A) or -3 (user B)");
  cmd->add_option("--trials", opt->trials, "Monte Carlo trials per SNR point");
  cmd->add_option("--seed", opt->seed, "64-bit experiment seed");
  cmd->add_option("--profile", opt->profile, "Channel profile file (delay_ns power_db rows)");
  cmd->add_option("--threads", opt->threads, "Worker threads (default: hardware)");
}

std::vector<phest::harness::ExperimentConfig> build_configs(const CommonOptions& opt) {
  using phest::harness::ExperimentConfig;
  std::vector<ExperimentConfig> configs;
  if (!opt.preset.empty() && !opt.config_path.empty()) {
    throw phest::ConfigError("--preset and --config are mutually exclusive");
  }
  if (!opt.preset.empty()) {
    configs = phest::harness::preset_configs(opt.preset);
  } else if (!opt.config_path.empty()) {
    configs.push_back(phest::harness::load_experiment_config(opt.config_path));
  } else {
    throw phest::ConfigError("either --preset or --config is required");
  }
  for (ExperimentConfig& cfg : configs) {
    if (!opt.snr_list.empty()) cfg.snr_db_list = opt.snr_list;
    if (opt.doppler_hz >= 0.0) cfg.f_d_hz = opt.doppler_hz;
    if (opt.n_t > 0) cfg.n_t = opt.n_t;
    if (opt.n_sch > 0) cfg.n_sch = opt.n_sch;
    if (opt.beta >= 0) cfg.beta = opt.beta;
    if (opt.nu != 0) cfg.nu = opt.nu;
    if (opt.trials > 0) cfg.n_trials = opt.trials;
    if (opt.seed >= 0) cfg.seed = static_cast<std::uint64_t>(opt.seed);
    if (!opt.profile.empty()) cfg.profile_path = opt.profile;
    if (opt.estimator == "ph") cfg.estimator = phest::harness::EstimatorSelect::PH;
    else if (opt.estimator == "ll") cfg.estimator = phest::harness::EstimatorSelect::LL;
    else if (opt.estimator == "both") cfg.estimator = phest::harness::EstimatorSelect::Both;
    if (opt.esprit == "ls") cfg.esprit_mode = phest::numerics::ShiftSolveMode::LS;
    else if (opt.esprit == "tls") cfg.esprit_mode = phest::numerics::ShiftSolveMode::TLS;
    cfg.validate();
  }
  // Overrides can collapse a preset's swept dimension; drop duplicates.
  std::vector<ExperimentConfig> unique;
  for (const ExperimentConfig& cfg : configs) {
    const bool dup = std::any_of(unique.begin(), unique.end(), [&](const ExperimentConfig& u) {
      return u.n_t == cfg.n_t && u.n_sch == cfg.n_sch && u.f_d_hz == cfg.f_d_hz;
    });
    if (!dup) unique.push_back(cfg);
  }
  return unique;
}

int run_simulate(const CommonOptions& opt, const std::string& out_path) {
  const auto configs = build_configs(opt);
  std::vector<phest::harness::NmseRecord> records;
  for (const auto& cfg : configs) {
    auto part = phest::harness::run_sweep(cfg, opt.threads);
    records.insert(records.end(), part.begin(), part.end());
  }
  phest::harness::write_csv(records, out_path);
  std::fprintf(stderr, "wrote %zu records to %s\n", records.size(), out_path.c_str());
  return 0;
}

int run_estimate(const CommonOptions& opt, double snr_db, long trial) {
  const auto configs = build_configs(opt);
  if (configs.size() != 1) {
    throw phest::ConfigError(
        "estimate needs a single configuration; collapse the preset with an override");
  }
  const phest::estimator::DelayEstimate de =
      phest::harness::estimate_window(configs.front(), snr_db, trial);
  std::printf("%s\n", de.to_record().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Uplink OFDMA parametric channel estimation simulator"};
  app.require_subcommand(1);

  CommonOptions sim_opt;
  std::string out_path = "nmse.csv";
  CLI::App* sim = app.add_subcommand("simulate", "Run an NMSE sweep and write a CSV table");
  add_common_options(sim, &sim_opt);
  sim->add_option("--out", out_path, "Output CSV path");

  CommonOptions est_opt;
  double est_snr_db = 30.0;
  long est_trial = 0;
  bool dump_delays = false;
  CLI::App* est = app.add_subcommand("estimate", "Run one estimation window");
  add_common_options(est, &est_opt);
  est->add_option("--snr-db", est_snr_db, "SNR of the window in dB");
  est->add_option("--trial", est_trial, "Trial index used to derive the window seed");
  est->add_flag("--dump-delays", dump_delays, "Print the delay-estimate record");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return run_simulate(sim_opt, out_path);
    if (est->parsed()) return run_estimate(est_opt, est_snr_db, est_trial);
  } catch (const phest::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const phest::IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
