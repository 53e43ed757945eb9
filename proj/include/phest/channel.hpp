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

#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "phest/errors.hpp"
#include "phest/numerics.hpp"
#include "phest/rng.hpp"
#include "phest/util.hpp"

namespace phest::channel {

using numerics::Complex;
using numerics::ComplexVector;
using numerics::kPi;

/// Static description of a sparse multipath channel: per-tap delay
/// (nanoseconds and in samples) and average power (dB and linear). The
/// linear powers are normalized to unit sum so that the per-tone SNR of a
/// unit-modulus transmission is 1/noise_variance. Delays are strictly
/// increasing with the first tap at zero, and may be non-sample-spaced.
struct ChannelProfile {
  std::vector<double> delays_ns;
  std::vector<double> powers_db;
  std::vector<double> delays_norm;  // delay / sampling period, real valued
  std::vector<double> powers_lin;   // normalized to unit sum
  std::size_t tap_count() const { return delays_ns.size(); }
};

inline ChannelProfile make_profile(std::vector<double> delays_ns,
                                   std::vector<double> powers_db,
                                   double bw_hz) {
  if (delays_ns.empty() || delays_ns.size() != powers_db.size()) {
    throw DimensionError("make_profile: need equal, non-empty delay and power lists");
  }
  if (!(bw_hz > 0.0)) throw DomainError("make_profile: bandwidth must be positive");
  if (delays_ns.front() != 0.0) {
    throw DomainError("make_profile: the first tap delay must be zero");
  }
  for (std::size_t i = 1; i < delays_ns.size(); ++i) {
    if (!(delays_ns[i] > delays_ns[i - 1])) {
      throw DomainError("make_profile: delays must be strictly increasing");
    }
  }
  ChannelProfile p;
  p.delays_ns = std::move(delays_ns);
  p.powers_db = std::move(powers_db);
  p.delays_norm.resize(p.delays_ns.size());
  p.powers_lin.resize(p.delays_ns.size());
  double total = 0.0;
  for (std::size_t i = 0; i < p.delays_ns.size(); ++i) {
    p.delays_norm[i] = p.delays_ns[i] * bw_hz * 1e-9;
    p.powers_lin[i] = std::pow(10.0, p.powers_db[i] / 10.0);
    total += p.powers_lin[i];
  }
  for (double& w : p.powers_lin) w /= total;
  return p;
}

/// ITU Vehicular A profile: relative delays [0, 310, 710, 1090, 1730, 2510] ns
/// and average powers [0, -1, -9, -10, -15, -20] dB.
inline ChannelProfile veh_a_profile(double bw_hz) {
  return make_profile({0.0, 310.0, 710.0, 1090.0, 1730.0, 2510.0},
                      {0.0, -1.0, -9.0, -10.0, -15.0, -20.0}, bw_hz);
}

/// Loads a profile from a plain-text table: one `delay_ns power_db` row
/// per tap, whitespace separated, `#` comments allowed.
inline ChannelProfile load_profile(const std::string& path, double bw_hz) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open channel profile: " + path);
  std::vector<double> delays, powers;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    std::istringstream row(line);
    double d = 0.0, w = 0.0;
    if (!(row >> d >> w)) {
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": expected 'delay_ns power_db'");
    }
    std::string rest;
    if (row >> rest) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": trailing tokens");
    }
    delays.push_back(d);
    powers.push_back(w);
  }
  if (delays.empty()) throw ConfigError(path + ": no taps found");
  return make_profile(std::move(delays), std::move(powers), bw_hz);
}

/// Normalized Jakes time correlation r_t(m) = J0(2 pi f_d T_s |m|).
inline double time_correlation(double f_d_hz, double t_s, long lag) {
  if (f_d_hz < 0.0) throw DomainError("time_correlation: Doppler must be non-negative");
  if (!(t_s > 0.0)) throw DomainError("time_correlation: symbol duration must be positive");
  return numerics::bessel_j0(2.0 * kPi * f_d_hz * t_s * std::abs(static_cast<double>(lag)));
}

/// Time series of complex tap gains, one row per tap, one column per
/// OFDMA symbol.
struct FadingProcess {
  Eigen::MatrixXcd gains;
  double f_d_hz = 0.0;
  double t_s = 0.0;
};

/// Generates L mutually independent stationary Rayleigh fading processes
/// with tap variances from the profile and Jakes autocorrelation
/// J0(2 pi f_d T_s m). Sum of 32 complex oscillators per tap on a rotated
/// uniform angle grid with i.i.d. phases; the ensemble autocorrelation of
/// this construction matches J0 exactly and each realization is
/// stationary. The taps' grids are interleaved by Weyl offsets inside one
/// grid cell so that no two taps share an oscillator frequency, which
/// keeps empirical cross-tap correlations decaying over the run instead
/// of beating slowly. Deterministic per seed. f_d = 0 freezes every tap
/// at a random constant.
inline FadingProcess generate_fading(const ChannelProfile& profile, double f_d_hz,
                                     double t_s, Eigen::Index n_symbols,
                                     std::uint64_t seed) {
  if (n_symbols < 1) throw DimensionError("generate_fading: need at least one symbol");
  if (f_d_hz < 0.0) throw DomainError("generate_fading: Doppler must be non-negative");
  if (!(t_s > 0.0)) throw DomainError("generate_fading: symbol duration must be positive");
  constexpr int kOscillators = 32;
  constexpr double kGolden = 0.6180339887498949;
  const Eigen::Index taps = static_cast<Eigen::Index>(profile.tap_count());
  FadingProcess fp;
  fp.gains.resize(taps, n_symbols);
  fp.f_d_hz = f_d_hz;
  fp.t_s = t_s;
  SplitMix64 common_rng(mix_seed(seed, 0xC0117E));
  const double common_rotation = common_rng.uniform01();
  for (Eigen::Index l = 0; l < taps; ++l) {
    SplitMix64 rng(mix_seed(seed, static_cast<std::uint64_t>(l)));
    const double cell = common_rotation + kGolden * static_cast<double>(l);
    const double grid_offset = (cell - std::floor(cell)) * (2.0 * kPi / kOscillators);
    Complex phasor[kOscillators];
    Complex rotation[kOscillators];
    for (int m = 0; m < kOscillators; ++m) {
      const double alpha = 2.0 * kPi * (m + 0.5) / kOscillators + grid_offset;
      const double omega = 2.0 * kPi * f_d_hz * std::cos(alpha) * t_s;
      const double phi = rng.uniform01() * 2.0 * kPi;
      phasor[m] = Complex(std::cos(phi), std::sin(phi));
      rotation[m] = Complex(std::cos(omega), std::sin(omega));
    }
    const double amp = std::sqrt(profile.powers_lin[l] / kOscillators);
    for (Eigen::Index n = 0; n < n_symbols; ++n) {
      Complex acc(0.0, 0.0);
      for (int m = 0; m < kOscillators; ++m) {
        acc += phasor[m];
        phasor[m] *= rotation[m];
      }
      fp.gains(l, n) = amp * acc;
    }
  }
  return fp;
}

/// Channel frequency response at the requested tone indexes:
/// H[k] = sum_l gains[l] * exp(-j 2 pi k tau_l / N).
inline ComplexVector cfr_at_tones(const ComplexVector& gains_at_n,
                                  const std::vector<double>& delays_norm,
                                  const std::vector<int>& tones, int n_fft) {
  if (static_cast<std::size_t>(gains_at_n.size()) != delays_norm.size()) {
    throw DimensionError("cfr_at_tones: gains and delays must have equal length");
  }
  if (n_fft < 1) throw DimensionError("cfr_at_tones: N must be positive");
  ComplexVector h(static_cast<Eigen::Index>(tones.size()));
  for (std::size_t i = 0; i < tones.size(); ++i) {
    const int k = tones[i];
    if (k < 0 || k >= n_fft) {
      throw IndexError("cfr_at_tones: tone index " + std::to_string(k) + " outside [0, N)");
    }
    Complex acc(0.0, 0.0);
    for (std::size_t l = 0; l < delays_norm.size(); ++l) {
      const double phase = -2.0 * kPi * static_cast<double>(k) * delays_norm[l] / n_fft;
      acc += gains_at_n[static_cast<Eigen::Index>(l)] * Complex(std::cos(phase), std::sin(phase));
    }
    h[static_cast<Eigen::Index>(i)] = acc;
  }
  return h;
}

}  // namespace phest::channel
