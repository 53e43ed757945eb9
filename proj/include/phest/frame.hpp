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
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "phest/channel.hpp"
#include "phest/errors.hpp"
#include "phest/numerics.hpp"
#include "phest/rng.hpp"
#include "phest/util.hpp"

namespace phest::frame {

using numerics::Complex;
using numerics::ComplexVector;

/// Uplink OFDMA numerology. Defaults are the 10 MHz WiMAX profile.
struct SystemConfig {
  double bw_hz = 10e6;
  int n_fft = 1024;
  int n_used = 840;
  int l_cp = 128;
  double f_c_hz = 3.5e9;

  double sample_period() const { return 1.0 / bw_hz; }
  double symbol_duration() const { return (n_fft + l_cp) / bw_hz; }

  void validate() const {
    if (!(bw_hz > 0.0)) throw ConfigError("SystemConfig: bw_hz must be positive");
    if (n_fft < 1) throw ConfigError("SystemConfig: n_fft must be positive");
    if (n_used < 1 || n_used > n_fft) throw ConfigError("SystemConfig: need 1 <= n_used <= n_fft");
    if (l_cp < 0 || l_cp >= n_fft) throw ConfigError("SystemConfig: need 0 <= l_cp < n_fft");
    if (!(f_c_hz > 0.0)) throw ConfigError("SystemConfig: f_c_hz must be positive");
  }
};

/// Loads a SystemConfig from a key/value file with keys bw_hz, n_fft,
/// n_used, l_cp, f_c_hz. Missing keys keep their WiMAX defaults.
inline SystemConfig load_system_config(const std::string& path) {
  const auto kv = parse_key_values(path);
  SystemConfig cfg;
  for (const auto& [key, value] : kv) {
    if (key == "bw_hz") cfg.bw_hz = to_double(value, key);
    else if (key == "n_fft") cfg.n_fft = static_cast<int>(to_long(value, key));
    else if (key == "n_used") cfg.n_used = static_cast<int>(to_long(value, key));
    else if (key == "l_cp") cfg.l_cp = static_cast<int>(to_long(value, key));
    else if (key == "f_c_hz") cfg.f_c_hz = to_double(value, key);
    else throw ConfigError(path + ": unknown key '" + key + "'");
  }
  cfg.validate();
  return cfg;
}

// The uplink resource unit is a tile of 4 contiguous subcarriers by 3
// OFDMA symbols with pilots at its four corners. Under virtual MIMO the
// corners are split diagonally between two users, which is what turns the
// per-symbol pilot sets of one user into a hopping pair with a constant
// offset nu = +/-3.
inline constexpr int kTileWidth = 4;
inline constexpr int kTilesPerSubchannel = 6;

/// One pseudo-random placement of tiles on the 4-aligned subcarrier grid,
/// valid for one 3-symbol group.
struct TileAllocation {
  std::vector<int> tile_starts;  // sorted base subcarrier index per tile
  int tiles_per_user = 0;
  long symbol_triplet_index = 0;
};

/// Draws 6 * n_sch disjoint tile start indexes uniformly without
/// replacement from {0, 4, 8, ...} within [0, n_used). Deterministic per
/// (seed, triplet_index); a different triplet_index re-draws the layout.
inline TileAllocation random_tile_allocation(const SystemConfig& cfg, int n_sch,
                                             std::uint64_t seed, long triplet_index) {
  cfg.validate();
  if (n_sch < 1) throw ConfigError("random_tile_allocation: n_sch must be positive");
  const int n_tiles = kTilesPerSubchannel * n_sch;
  const int slots = cfg.n_used / kTileWidth;
  if (n_tiles > slots) {
    throw AllocationError("random_tile_allocation: " + std::to_string(n_tiles) +
                          " tiles do not fit into " + std::to_string(slots) + " slots");
  }
  SplitMix64 rng(mix_seed(seed, static_cast<std::uint64_t>(triplet_index)));
  std::vector<int> grid(slots);
  std::iota(grid.begin(), grid.end(), 0);
  // Partial Fisher-Yates: the first n_tiles entries become the sample.
  for (int i = 0; i < n_tiles; ++i) {
    const int j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(slots - i)));
    std::swap(grid[i], grid[j]);
  }
  TileAllocation alloc;
  alloc.tile_starts.resize(n_tiles);
  for (int i = 0; i < n_tiles; ++i) alloc.tile_starts[i] = kTileWidth * grid[i];
  std::sort(alloc.tile_starts.begin(), alloc.tile_starts.end());
  alloc.tiles_per_user = n_tiles;
  alloc.symbol_triplet_index = triplet_index;
  return alloc;
}

/// The two virtual-MIMO users sharing each tile.
enum class UserRole { A, B };

/// Per-parity pilot index sets of one user. The inner hopping identity
/// pilots_odd - pilots_even = nu holds element-wise.
struct PilotPattern {
  std::vector<int> pilots_even;
  std::vector<int> pilots_odd;
  int nu = 0;
  int pilot_count = 0;  // P, one pilot per tile per symbol
};

/// Corner-pilot split: user A owns (first symbol, k0) and (third symbol,
/// k0+3) of every tile, user B the mirrored diagonal. This is the unique
/// split for which each user's per-symbol pilot sets satisfy the hopping
/// identity with a constant offset.
inline PilotPattern pilot_pattern(const TileAllocation& alloc, UserRole role) {
  if (alloc.tile_starts.empty()) throw DimensionError("pilot_pattern: empty allocation");
  PilotPattern p;
  p.pilot_count = static_cast<int>(alloc.tile_starts.size());
  p.pilots_even.reserve(alloc.tile_starts.size());
  p.pilots_odd.reserve(alloc.tile_starts.size());
  const int even_off = role == UserRole::A ? 0 : kTileWidth - 1;
  const int odd_off = role == UserRole::A ? kTileWidth - 1 : 0;
  for (int k0 : alloc.tile_starts) {
    p.pilots_even.push_back(k0 + even_off);
    p.pilots_odd.push_back(k0 + odd_off);
  }
  p.nu = odd_off - even_off;  // +3 for A, -3 for B
  return p;
}

/// Evaluation grids for one user: in pilot-bearing symbols the two inner
/// subcarriers of each tile carry data (the outer two are the users'
/// pilots), in the middle symbol all four do. Identical for both users.
struct DataTones {
  std::vector<int> even;
  std::vector<int> odd;
  std::vector<int> middle;
};

inline DataTones data_tones(const TileAllocation& alloc) {
  DataTones d;
  d.even.reserve(2 * alloc.tile_starts.size());
  d.odd.reserve(2 * alloc.tile_starts.size());
  d.middle.reserve(4 * alloc.tile_starts.size());
  for (int k0 : alloc.tile_starts) {
    d.even.push_back(k0 + 1);
    d.even.push_back(k0 + 2);
    d.odd.push_back(k0 + 1);
    d.odd.push_back(k0 + 2);
    for (int k = 0; k < kTileWidth; ++k) d.middle.push_back(k0 + k);
  }
  return d;
}

/// Gray-mapped QPSK: 00 -> (1+j)/sqrt(2), 01 -> (-1+j)/sqrt(2),
/// 11 -> (-1-j)/sqrt(2), 10 -> (1-j)/sqrt(2).
inline ComplexVector modulate_qpsk(const std::vector<int>& bits) {
  if (bits.size() % 2 != 0) throw DimensionError("modulate_qpsk: bit count must be even");
  constexpr double kInvSqrt2 = 0.70710678118654752440;
  ComplexVector out(static_cast<Eigen::Index>(bits.size() / 2));
  for (std::size_t i = 0; i < bits.size(); i += 2) {
    const int b0 = bits[i] & 1;
    const int b1 = bits[i + 1] & 1;
    const double re = (b1 == 0 ? 1.0 : -1.0) * kInvSqrt2;
    const double im = (b0 == 0 ? 1.0 : -1.0) * kInvSqrt2;
    out[static_cast<Eigen::Index>(i / 2)] = Complex(re, im);
  }
  return out;
}

/// n random QPSK symbols drawn from the supplied stream.
inline ComplexVector random_qpsk(Eigen::Index n, SplitMix64& rng) {
  std::vector<int> bits(static_cast<std::size_t>(2 * n));
  for (auto& b : bits) b = static_cast<int>(rng.next() & 1);
  return modulate_qpsk(bits);
}

/// P unit-modulus QPSK pilot values, deterministic per seed and known to
/// both ends; X_p^H X_p = I_P holds by the PSK property.
inline ComplexVector pilot_symbols(int p, std::uint64_t seed) {
  if (p < 1) throw DimensionError("pilot_symbols: P must be positive");
  SplitMix64 rng(seed);
  return random_qpsk(p, rng);
}

/// Per-tone observation of one OFDMA symbol on an arbitrary tone set.
struct ToneObservation {
  long symbol_index = 0;
  ComplexVector tx;
  ComplexVector cfr_true;
  ComplexVector rx;
  double noise_var = 0.0;
};

/// Frequency-domain observation rx = tx .* H + w on the given tones,
/// with H from the channel gains of this symbol and w circularly
/// symmetric Gaussian of the given variance. Exact under sufficient CP
/// and ideal synchronization, which this model assumes.
inline ToneObservation observe_symbol(const SystemConfig& cfg, const std::vector<int>& tones,
                                      const ComplexVector& tx, const ComplexVector& gains_at_n,
                                      const channel::ChannelProfile& profile, double noise_var,
                                      std::uint64_t seed, long symbol_index = 0) {
  if (static_cast<std::size_t>(tx.size()) != tones.size()) {
    throw DimensionError("observe_symbol: |tones| must equal |tx|");
  }
  if (noise_var < 0.0) throw DomainError("observe_symbol: negative noise variance");
  ToneObservation obs;
  obs.symbol_index = symbol_index;
  obs.tx = tx;
  obs.cfr_true = channel::cfr_at_tones(gains_at_n, profile.delays_norm, tones, cfg.n_fft);
  SplitMix64 rng(seed);
  const ComplexVector noise = numerics::complex_gaussian(tx.size(), noise_var, rng);
  obs.rx = tx.cwiseProduct(obs.cfr_true) + noise;
  obs.noise_var = noise_var;
  return obs;
}

}  // namespace phest::frame
