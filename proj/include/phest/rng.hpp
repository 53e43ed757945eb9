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

#include <cstdint>

namespace phest {

/// SplitMix64 (Steele/Lea/Flood splittable generator). A 64-bit generator
/// whose state advances by a fixed odd constant and whose output is a
/// bijective mix of the state, so it behaves like a counter-based stream:
/// bit-reproducible across platforms and trivially splittable into
/// independent per-worker streams. All randomness in the library flows
/// through this type.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t next() noexcept {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1), 53 random bits.
  double uniform01() noexcept {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  /// Uniform double in (0, 1]; safe as a log() argument.
  double uniform_open01() noexcept {
    return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53;
  }

  /// Uniform integer in [0, bound). bound must be nonzero.
  std::uint64_t below(std::uint64_t bound) noexcept { return next() % bound; }

 private:
  std::uint64_t state_;
};

/// Derives the seed of an independent substream from a base seed and a
/// stream tag. Every module and worker obtains its randomness as
/// SplitMix64(mix_seed(seed, tag)) with a distinct tag, so streams never
/// collide and results are reproducible regardless of scheduling.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  SplitMix64 g(seed ^ (0x9E3779B97F4A7C15ULL * (stream + 1)));
  return g.next();
}

}  // namespace phest
