// Copyright 2026 The FedLDP Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <cstdint>

#include "fedldp/types.hpp"

namespace fedldp {

// SplitMix64 finalizer; full-period mixing of a 64-bit counter.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Deterministic substream keyed by (seed, stream, step), e.g. one stream per
// (worker, round). Substreams are independent, so worker updates may run in
// any order or thread without changing the drawn noise.
class NoiseStream {
 public:
  NoiseStream(std::uint64_t seed, std::uint64_t stream, std::uint64_t step)
      : state_(derive_key(seed, stream, step)) {}

  // Uniform draw in the open interval (0, 1).
  double next_uniform() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return (static_cast<double>(z >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via the Marsaglia polar method.
  double next_gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * next_uniform() - 1.0;
      v = 2.0 * next_uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double factor = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * factor;
    have_spare_ = true;
    return u * factor;
  }

  void fill_gaussian(Eigen::Ref<Vector> out, double stddev) {
    for (Eigen::Index j = 0; j < out.size(); ++j) {
      out[j] = stddev * next_gaussian();
    }
  }

  // Uniform integer in [0, bound) without modulo bias (Lemire reduction).
  std::uint64_t next_below(std::uint64_t bound) {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    z ^= z >> 31;
    unsigned __int128 wide = static_cast<unsigned __int128>(z) * bound;
    return static_cast<std::uint64_t>(wide >> 64);
  }

 private:
  static std::uint64_t derive_key(std::uint64_t seed, std::uint64_t stream,
                                  std::uint64_t step) {
    std::uint64_t h = mix64(seed);
    h = mix64(h ^ (0xA24BAED4963EE407ULL * (stream + 1)));
    h = mix64(h ^ (0x9FB21C651E98DF25ULL * (step + 1)));
    return h;
  }

  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace fedldp
