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

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "phest/channel.hpp"
#include "phest/errors.hpp"
#include "phest/estimator.hpp"
#include "phest/frame.hpp"
#include "phest/numerics.hpp"
#include "phest/rng.hpp"
#include "phest/util.hpp"

namespace phest::harness {

using numerics::Complex;
using numerics::ComplexVector;

enum class EstimatorSelect { PH, LL, Both };

/// Full description of one Monte Carlo experiment. The per-tone SNR
/// convention is 1/noise_variance: the channel profile has unit total
/// power and every transmitted symbol has unit modulus.
struct ExperimentConfig {
  frame::SystemConfig system;
  int n_sch = 20;             // allocated subchannels (6 tiles each)
  int n_t = 192;              // observed (pilot-bearing) OFDMA symbols per window
  double f_d_hz = 200.0;      // maximum Doppler
  std::vector<double> snr_db_list = {0, 5, 10, 15, 20, 25, 30, 35, 40};
  int n_trials = 100;
  EstimatorSelect estimator = EstimatorSelect::Both;
  numerics::ShiftSolveMode esprit_mode = numerics::ShiftSolveMode::TLS;
  int beta = 5;
  int nu = 3;                 // +3 runs virtual-MIMO user A, -3 user B
  std::uint64_t seed = 1;
  std::string profile_path;   // empty selects the Vehicular A profile

  void validate() const {
    system.validate();
    if (n_sch < 1) throw ConfigError("ExperimentConfig: n_sch must be positive");
    if (frame::kTilesPerSubchannel * frame::kTileWidth * n_sch > system.n_used) {
      throw ConfigError("ExperimentConfig: 24 * n_sch must not exceed n_used");
    }
    if (n_t < 2) throw ConfigError("ExperimentConfig: n_t must be at least 2");
    if (f_d_hz < 0.0) throw ConfigError("ExperimentConfig: f_d_hz must be non-negative");
    if (snr_db_list.empty()) throw ConfigError("ExperimentConfig: empty SNR list");
    if (n_trials < 1) throw ConfigError("ExperimentConfig: n_trials must be positive");
    if (beta < 0 || beta > 5) throw ConfigError("ExperimentConfig: beta must lie in [0, 5]");
    if (nu != 3 && nu != -3) {
      throw ConfigError("ExperimentConfig: the tile geometry fixes nu to +3 (user A) or -3 (user B)");
    }
  }

  channel::ChannelProfile resolve_profile() const {
    channel::ChannelProfile profile = profile_path.empty()
                                          ? channel::veh_a_profile(system.bw_hz)
                                          : channel::load_profile(profile_path, system.bw_hz);
    // Sufficient-CP assumption: every tap must fall inside the prefix.
    for (double tau : profile.delays_norm) {
      if (tau >= system.l_cp) {
        throw ConfigError("channel profile exceeds the cyclic prefix (delay " +
                          std::to_string(tau) + " >= " + std::to_string(system.l_cp) + ")");
      }
    }
    return profile;
  }
};

/// One aggregated NMSE point.
struct NmseRecord {
  std::string estimator;  // "ph" or "ll"
  double snr_db = 0.0;
  double f_d_hz = 0.0;
  int n_t = 0;
  int n_sch = 0;
  double nmse_db = 0.0;
  int trials = 0;         // trials that contributed to the point
  double ci95_db = 0.0;   // bootstrap half-width
  bool flagged = false;   // more than 5% of trials excluded (not serialized)
};

inline constexpr double kNmseFloorDb = -200.0;

/// NMSE in dB from accumulated squared-error and energy sums, floored at
/// -200 dB for perfect estimates.
inline double nmse_from_sums(double err_sum, double energy_sum) {
  if (!(energy_sum > 0.0)) throw DegenerateInputError("nmse: zero truth energy");
  if (err_sum <= 0.0) return kNmseFloorDb;
  return std::max(kNmseFloorDb, 10.0 * std::log10(err_sum / energy_sum));
}

/// NMSE in dB over matched lists of estimate/truth vectors:
/// 10 log10(sum |est - truth|^2 / sum |truth|^2).
inline double nmse_db(const std::vector<ComplexVector>& estimates,
                      const std::vector<ComplexVector>& truths) {
  if (estimates.size() != truths.size()) throw DimensionError("nmse_db: list length mismatch");
  double err = 0.0;
  double energy = 0.0;
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    if (estimates[i].size() != truths[i].size()) {
      throw DimensionError("nmse_db: vector shape mismatch");
    }
    err += (estimates[i] - truths[i]).squaredNorm();
    energy += truths[i].squaredNorm();
  }
  return nmse_from_sums(err, energy);
}

/// Error/energy sums of a single trial, per estimator.
struct TrialResult {
  double ll_err = 0.0;
  double ll_energy = 0.0;
  double ph_err = 0.0;
  double ph_energy = 0.0;
  bool ph_ok = true;
  std::string ph_error;
  estimator::DelayEstimate delay_estimate;  // valid when ph_ok and PH was run
};

namespace detail {

// Stream tags for the independent randomness consumed by one trial.
inline constexpr std::uint64_t kStreamAllocation = 1;
inline constexpr std::uint64_t kStreamFading = 2;
inline constexpr std::uint64_t kStreamPilotBase = 0x1000;
inline constexpr std::uint64_t kStreamDataBase = 0x200000;
inline constexpr std::uint64_t kStreamNoiseBase = 0x400000;

}  // namespace detail

/// Runs one Monte Carlo trial: draw a tile layout, generate a fading
/// realization over the window, transmit pilots and QPSK data, run the
/// requested estimators and return squared-error/energy sums over every
/// data tone of the window (both pilot-bearing symbols and the middle
/// symbols). Estimator failures mark the trial instead of aborting it.
inline TrialResult run_trial(const ExperimentConfig& cfg,
                             const channel::ChannelProfile& profile, double snr_db,
                             std::uint64_t trial_seed) {
  const double noise_var = std::pow(10.0, -snr_db / 10.0);
  const long n_pairs = cfg.n_t / 2;  // odd n_t: the dangling symbol is unused
  const long n_phys = 3 * n_pairs;
  const bool want_ph = cfg.estimator != EstimatorSelect::LL;
  const bool want_ll = cfg.estimator != EstimatorSelect::PH;

  const frame::TileAllocation alloc = frame::random_tile_allocation(
      cfg.system, cfg.n_sch, mix_seed(trial_seed, detail::kStreamAllocation), 0);
  const frame::UserRole role = cfg.nu > 0 ? frame::UserRole::A : frame::UserRole::B;
  const frame::PilotPattern pattern = frame::pilot_pattern(alloc, role);
  const frame::DataTones data = frame::data_tones(alloc);
  const int p = pattern.pilot_count;

  const channel::FadingProcess fading = channel::generate_fading(
      profile, cfg.f_d_hz, cfg.system.symbol_duration(), n_phys,
      mix_seed(trial_seed, detail::kStreamFading));

  estimator::WindowSetup setup;
  setup.pilots_even = pattern.pilots_even;
  setup.pilots_odd = pattern.pilots_odd;
  setup.data_even = data.even;
  setup.data_odd = data.odd;
  setup.data_middle = data.middle;
  setup.n_fft = cfg.system.n_fft;
  setup.l_cp = cfg.system.l_cp;
  setup.nu = pattern.nu;
  setup.beta = cfg.beta;
  setup.mode = cfg.esprit_mode;
  estimator::PhWindowEstimator ph(setup);

  TrialResult out;
  std::vector<ComplexVector> truth_even(n_pairs), truth_odd(n_pairs), truth_middle(n_pairs);

  auto symbol_tones = [&](const std::vector<int>& pilots, const std::vector<int>& dat) {
    std::vector<int> tones = pilots;
    tones.insert(tones.end(), dat.begin(), dat.end());
    return tones;
  };
  const std::vector<int> tones_even = symbol_tones(pattern.pilots_even, data.even);
  const std::vector<int> tones_odd = symbol_tones(pattern.pilots_odd, data.odd);

  for (long m = 0; m < n_pairs; ++m) {
    const long sym_even = 3 * m;
    const long sym_middle = 3 * m + 1;
    const long sym_odd = 3 * m + 2;

    const ComplexVector pilots_tx_even =
        frame::pilot_symbols(p, mix_seed(trial_seed, detail::kStreamPilotBase + 2 * m));
    const ComplexVector pilots_tx_odd =
        frame::pilot_symbols(p, mix_seed(trial_seed, detail::kStreamPilotBase + 2 * m + 1));

    SplitMix64 data_rng(mix_seed(trial_seed, detail::kStreamDataBase + m));
    const ComplexVector data_tx_even =
        frame::random_qpsk(static_cast<Eigen::Index>(data.even.size()), data_rng);
    const ComplexVector data_tx_odd =
        frame::random_qpsk(static_cast<Eigen::Index>(data.odd.size()), data_rng);
    const ComplexVector data_tx_middle =
        frame::random_qpsk(static_cast<Eigen::Index>(data.middle.size()), data_rng);

    ComplexVector tx_even(static_cast<Eigen::Index>(tones_even.size()));
    tx_even << pilots_tx_even, data_tx_even;
    ComplexVector tx_odd(static_cast<Eigen::Index>(tones_odd.size()));
    tx_odd << pilots_tx_odd, data_tx_odd;

    const frame::ToneObservation obs_even = frame::observe_symbol(
        cfg.system, tones_even, tx_even, fading.gains.col(sym_even), profile, noise_var,
        mix_seed(trial_seed, detail::kStreamNoiseBase + 3 * m), sym_even);
    const frame::ToneObservation obs_middle = frame::observe_symbol(
        cfg.system, data.middle, data_tx_middle, fading.gains.col(sym_middle), profile,
        noise_var, mix_seed(trial_seed, detail::kStreamNoiseBase + 3 * m + 1), sym_middle);
    const frame::ToneObservation obs_odd = frame::observe_symbol(
        cfg.system, tones_odd, tx_odd, fading.gains.col(sym_odd), profile, noise_var,
        mix_seed(trial_seed, detail::kStreamNoiseBase + 3 * m + 2), sym_odd);

    const ComplexVector ls_even =
        estimator::ls_pilot_estimate(obs_even.rx.head(p), pilots_tx_even);
    const ComplexVector ls_odd =
        estimator::ls_pilot_estimate(obs_odd.rx.head(p), pilots_tx_odd);

    truth_even[m] = obs_even.cfr_true.tail(static_cast<Eigen::Index>(data.even.size()));
    truth_odd[m] = obs_odd.cfr_true.tail(static_cast<Eigen::Index>(data.odd.size()));
    truth_middle[m] = obs_middle.cfr_true;

    if (want_ph) ph.add_pair(ls_even, ls_odd);

    if (want_ll) {
      const ComplexVector tile_mean = estimator::ll_baseline(ls_even, ls_odd);
      for (int t = 0; t < p; ++t) {
        const Complex v = tile_mean[t];
        for (int d = 0; d < 2; ++d) {
          out.ll_err += std::norm(v - truth_even[m][2 * t + d]);
          out.ll_err += std::norm(v - truth_odd[m][2 * t + d]);
        }
        for (int d = 0; d < 4; ++d) out.ll_err += std::norm(v - truth_middle[m][4 * t + d]);
      }
      out.ll_energy += truth_even[m].squaredNorm() + truth_odd[m].squaredNorm() +
                       truth_middle[m].squaredNorm();
    }
  }

  if (want_ph) {
    try {
      const estimator::PhWindowEstimator::WindowResult res = ph.finalize();
      out.delay_estimate = res.delay_estimate;
      for (long m = 0; m < n_pairs; ++m) {
        out.ph_err += (res.data_even_est[m] - truth_even[m]).squaredNorm();
        out.ph_err += (res.data_odd_est[m] - truth_odd[m]).squaredNorm();
        out.ph_err += (res.data_middle_est[m] - truth_middle[m]).squaredNorm();
        out.ph_energy += truth_even[m].squaredNorm() + truth_odd[m].squaredNorm() +
                         truth_middle[m].squaredNorm();
      }
    } catch (const Error& e) {
      out.ph_ok = false;
      out.ph_error = e.what();
      out.ph_err = 0.0;
      out.ph_energy = 0.0;
    }
  }
  return out;
}

/// Convenience overload resolving the profile from the configuration.
inline TrialResult run_trial(const ExperimentConfig& cfg, double snr_db,
                             std::uint64_t trial_seed) {
  cfg.validate();
  return run_trial(cfg, cfg.resolve_profile(), snr_db, trial_seed);
}

/// Runs the PH pipeline for a single window and returns its delay
/// estimate (the `estimate --dump-delays` path).
inline estimator::DelayEstimate estimate_window(const ExperimentConfig& cfg, double snr_db,
                                                long trial_index = 0) {
  cfg.validate();
  ExperimentConfig ph_cfg = cfg;
  ph_cfg.estimator = EstimatorSelect::PH;
  const TrialResult result = run_trial(ph_cfg, ph_cfg.resolve_profile(), snr_db,
                                       mix_seed(cfg.seed, static_cast<std::uint64_t>(trial_index)));
  if (!result.ph_ok) throw DegenerateInputError("estimate_window failed: " + result.ph_error);
  return result.delay_estimate;
}

namespace detail {

template <typename Body>
void parallel_for(long n, int threads, Body&& body) {
  if (threads <= 0) {
    const unsigned hc = std::thread::hardware_concurrency();
    threads = hc > 0 ? static_cast<int>(hc) : 1;
  }
  threads = static_cast<int>(std::min<long>(threads, n));
  if (threads <= 1) {
    for (long i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<long> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const long i = next.fetch_add(1);
      if (i >= n || failed.load()) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        failed.store(true);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads) - 1);
  for (int t = 0; t < threads - 1; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

/// Deterministic bootstrap (200 resamples) of the ratio-of-sums NMSE over
/// per-trial (error, energy) pairs; returns the 95% half-width in dB.
inline double bootstrap_ci95_db(const std::vector<std::pair<double, double>>& sums,
                                std::uint64_t seed) {
  const std::size_t n = sums.size();
  if (n < 2) return 0.0;
  constexpr int kResamples = 200;
  std::vector<double> stats;
  stats.reserve(kResamples);
  SplitMix64 rng(seed);
  for (int b = 0; b < kResamples; ++b) {
    double err = 0.0;
    double energy = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const auto& s = sums[rng.below(n)];
      err += s.first;
      energy += s.second;
    }
    if (energy > 0.0) stats.push_back(nmse_from_sums(err, energy));
  }
  if (stats.size() < 2) return 0.0;
  std::sort(stats.begin(), stats.end());
  const auto quantile = [&](double q) {
    const double pos = q * (static_cast<double>(stats.size()) - 1.0);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, stats.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return stats[lo] * (1.0 - frac) + stats[hi] * frac;
  };
  return 0.5 * (quantile(0.975) - quantile(0.025));
}

}  // namespace detail

/// Runs the full sweep: for every SNR point, n_trials independent trials
/// (parallelized; per-trial seeds derived as
/// mix_seed(seed, snr_index * 2^32 + trial)), aggregated by ratio of sums
/// into one record per estimator. A record is flagged when more than 5%
/// of its trials were excluded by estimator failures. Deterministic per
/// configuration, independent of thread count.
inline std::vector<NmseRecord> run_sweep(const ExperimentConfig& cfg, int threads = 0) {
  cfg.validate();
  const channel::ChannelProfile profile = cfg.resolve_profile();
  const bool want_ph = cfg.estimator != EstimatorSelect::LL;
  const bool want_ll = cfg.estimator != EstimatorSelect::PH;

  std::vector<NmseRecord> records;
  for (std::size_t si = 0; si < cfg.snr_db_list.size(); ++si) {
    const double snr_db = cfg.snr_db_list[si];
    std::vector<TrialResult> results(static_cast<std::size_t>(cfg.n_trials));
    detail::parallel_for(cfg.n_trials, threads, [&](long trial) {
      const std::uint64_t trial_seed =
          mix_seed(cfg.seed, (static_cast<std::uint64_t>(si) << 32) |
                                 static_cast<std::uint64_t>(trial));
      results[static_cast<std::size_t>(trial)] = run_trial(cfg, profile, snr_db, trial_seed);
    });

    auto make_record = [&](const std::string& name, std::uint64_t boot_tag) {
      NmseRecord rec;
      rec.estimator = name;
      rec.snr_db = snr_db;
      rec.f_d_hz = cfg.f_d_hz;
      rec.n_t = cfg.n_t;
      rec.n_sch = cfg.n_sch;
      double err = 0.0;
      double energy = 0.0;
      std::vector<std::pair<double, double>> sums;
      sums.reserve(results.size());
      int failures = 0;
      for (const TrialResult& r : results) {
        if (name == "ph") {
          if (!r.ph_ok) {
            ++failures;
            continue;
          }
          err += r.ph_err;
          energy += r.ph_energy;
          sums.emplace_back(r.ph_err, r.ph_energy);
        } else {
          err += r.ll_err;
          energy += r.ll_energy;
          sums.emplace_back(r.ll_err, r.ll_energy);
        }
      }
      rec.trials = cfg.n_trials - failures;
      rec.flagged = rec.trials < cfg.n_trials - cfg.n_trials / 20;
      if (rec.trials == 0) {
        rec.nmse_db = 0.0;
        rec.flagged = true;
      } else {
        rec.nmse_db = nmse_from_sums(err, energy);
        rec.ci95_db = detail::bootstrap_ci95_db(
            sums, mix_seed(cfg.seed, 0xB007000000000000ULL ^ (boot_tag << 32) ^ si));
      }
      if (rec.flagged) {
        std::fprintf(stderr,
                     "warning: %s point at %.1f dB flagged (%d of %d trials succeeded)\n",
                     name.c_str(), snr_db, rec.trials, cfg.n_trials);
      }
      return rec;
    };

    if (want_ll) records.push_back(make_record("ll", 1));
    if (want_ph) records.push_back(make_record("ph", 2));
  }
  return records;
}

namespace detail {

inline bool record_before(const NmseRecord& a, const NmseRecord& b) {
  if (a.estimator != b.estimator) return a.estimator < b.estimator;
  if (a.f_d_hz != b.f_d_hz) return a.f_d_hz < b.f_d_hz;
  if (a.n_t != b.n_t) return a.n_t < b.n_t;
  if (a.n_sch != b.n_sch) return a.n_sch < b.n_sch;
  return a.snr_db < b.snr_db;
}

}  // namespace detail

inline constexpr const char* kCsvHeader = "estimator,snr_db,f_d_hz,n_t,n_sch,nmse_db,trials,ci95_db";

/// Writes records as CSV, sorted by (estimator, f_d, n_t, n_sch, snr) so
/// identical sweeps produce byte-identical files.
inline void write_csv(std::vector<NmseRecord> records, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  std::sort(records.begin(), records.end(), detail::record_before);
  out << kCsvHeader << "\n";
  char line[256];
  for (const NmseRecord& r : records) {
    std::snprintf(line, sizeof line, "%s,%.2f,%.2f,%d,%d,%.6f,%d,%.6f", r.estimator.c_str(),
                  r.snr_db, r.f_d_hz, r.n_t, r.n_sch, r.nmse_db, r.trials, r.ci95_db);
    out << line << "\n";
  }
  if (!out) throw IoError("write failed: " + path);
}

/// Parses a CSV produced by write_csv.
inline std::vector<NmseRecord> read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for reading: " + path);
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty CSV: " + path);
  if (trim(line) != kCsvHeader) throw IoError("unexpected CSV header in " + path);
  std::vector<NmseRecord> records;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto fields = split(trim(line), ',');
    if (fields.size() != 8) {
      throw IoError(path + ":" + std::to_string(lineno) + ": expected 8 fields");
    }
    NmseRecord r;
    r.estimator = fields[0];
    r.snr_db = to_double(fields[1], "snr_db");
    r.f_d_hz = to_double(fields[2], "f_d_hz");
    r.n_t = static_cast<int>(to_long(fields[3], "n_t"));
    r.n_sch = static_cast<int>(to_long(fields[4], "n_sch"));
    r.nmse_db = to_double(fields[5], "nmse_db");
    r.trials = static_cast<int>(to_long(fields[6], "trials"));
    r.ci95_db = to_double(fields[7], "ci95_db");
    records.push_back(std::move(r));
  }
  return records;
}

/// Figure presets. Each returns one configuration per curve of the
/// corresponding sweep; the SNR axis is the default 0..40 dB grid.
inline std::vector<ExperimentConfig> preset_configs(const std::string& name) {
  ExperimentConfig base;
  std::vector<ExperimentConfig> out;
  if (name == "fig1") {
    for (int n_t : {96, 192, 387}) {
      base.n_t = n_t;
      out.push_back(base);
    }
  } else if (name == "fig2") {
    for (double f_d : {50.0, 200.0, 500.0}) {
      base.f_d_hz = f_d;
      out.push_back(base);
    }
  } else if (name == "fig3") {
    for (int n_sch : {10, 20, 30}) {
      base.n_sch = n_sch;
      out.push_back(base);
    }
  } else {
    throw ConfigError("unknown preset '" + name + "' (expected fig1, fig2 or fig3)");
  }
  return out;
}

/// Loads an ExperimentConfig from a key/value file. System keys (bw_hz,
/// n_fft, n_used, l_cp, f_c_hz) and experiment keys (n_sch, n_t, f_d_hz,
/// snr_db_list, trials, estimator, esprit, beta, nu, seed, profile) are
/// accepted; anything omitted keeps its default.
inline ExperimentConfig load_experiment_config(const std::string& path) {
  const auto kv = parse_key_values(path);
  ExperimentConfig cfg;
  for (const auto& [key, value] : kv) {
    if (key == "bw_hz") cfg.system.bw_hz = to_double(value, key);
    else if (key == "n_fft") cfg.system.n_fft = static_cast<int>(to_long(value, key));
    else if (key == "n_used") cfg.system.n_used = static_cast<int>(to_long(value, key));
    else if (key == "l_cp") cfg.system.l_cp = static_cast<int>(to_long(value, key));
    else if (key == "f_c_hz") cfg.system.f_c_hz = to_double(value, key);
    else if (key == "n_sch") cfg.n_sch = static_cast<int>(to_long(value, key));
    else if (key == "n_t") cfg.n_t = static_cast<int>(to_long(value, key));
    else if (key == "f_d_hz") cfg.f_d_hz = to_double(value, key);
    else if (key == "trials") cfg.n_trials = static_cast<int>(to_long(value, key));
    else if (key == "beta") cfg.beta = static_cast<int>(to_long(value, key));
    else if (key == "nu") cfg.nu = static_cast<int>(to_long(value, key));
    else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(to_long(value, key));
    else if (key == "profile") cfg.profile_path = value;
    else if (key == "snr_db_list") {
      cfg.snr_db_list.clear();
      for (const std::string& item : split(value, ',')) {
        cfg.snr_db_list.push_back(to_double(trim(item), key));
      }
    } else if (key == "estimator") {
      if (value == "ph") cfg.estimator = EstimatorSelect::PH;
      else if (value == "ll") cfg.estimator = EstimatorSelect::LL;
      else if (value == "both") cfg.estimator = EstimatorSelect::Both;
      else throw ConfigError(path + ": estimator must be ph, ll or both");
    } else if (key == "esprit") {
      if (value == "ls") cfg.esprit_mode = numerics::ShiftSolveMode::LS;
      else if (value == "tls") cfg.esprit_mode = numerics::ShiftSolveMode::TLS;
      else throw ConfigError(path + ": esprit must be ls or tls");
    } else {
      throw ConfigError(path + ": unknown key '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

}  // namespace phest::harness
