// Copyright 2026 The Privacy Cascade Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace cascade {

/// SplitMix64 (Steele, Lea, Flood 2014). Every stochastic choice in this
/// project draws from this generator so that runs are reproducible from a
/// single 64-bit seed, and so the exact draw sequence can be re-implemented
/// in any language from this file alone.
///
///   state += 0x9E3779B97F4A7C15
///   z = state; z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
///   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
///   return z ^ (z >> 31)
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1): top 53 bits scaled by 2^-53.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform double in [lo, hi).
  double next_uniform(double lo, double hi) {
    return lo + (hi - lo) * next_double();
  }

  /// Standard normal via Box-Muller on two uniform draws. Consumes exactly
  /// two next_double() calls; no state beyond the counter.
  double next_gaussian() {
    double u1 = next_double();
    double u2 = next_double();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  /// Uniform integer in [0, n). n must be > 0. Plain modulo: the bias for
  /// the n used here (lexicon sizes, small ranges) is below 2^-50.
  std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

 private:
  std::uint64_t state_;
};

/// FNV-1a 64-bit hash, used to derive per-record generator seeds from
/// string ids. Documented so external re-implementations can reproduce
/// scripted-backend draws.
inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

/// Seed for the i-th record substream of a generation run: the substream
/// seeds are spaced by the SplitMix64 golden-gamma increment so streams do
/// not overlap.
inline std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index) {
  return seed + (index + 1) * 0x9E3779B97F4A7C15ULL;
}

}  // namespace cascade
