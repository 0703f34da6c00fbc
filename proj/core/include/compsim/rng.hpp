// Copyright 2026 the compsim authors
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

#include <complex>
#include <cstdint>
#include <random>

namespace compsim {

/// Seedable random stream with deterministic substream derivation.
///
/// Every stochastic component owns its own stream, derived from the run seed
/// and a stable tag (e.g. (ue_id, trp_id) for a radio link), so that the draw
/// sequence of one component never depends on how often another one is
/// sampled. Replications with distinct seeds are independent by construction.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : seed_(seed), gen_(mix(seed)) {}

  /// Derives an independent stream from this stream's seed and a tag.
  /// Does not consume state; the same (seed, tag) always yields the same
  /// substream.
  RngStream child(std::uint64_t tag) const { return RngStream(mix(seed_ ^ mix(tag + 0x9e3779b97f4a7c15ull))); }

  std::uint64_t seed() const { return seed_; }

  /// Uniform double in [0, 1).
  double uniform() { return unit_(gen_); }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal draw.
  double normal() { return norm_(gen_); }

  /// Circularly-symmetric complex normal with unit variance, CN(0, 1).
  std::complex<double> cnormal() {
    constexpr double inv_sqrt2 = 0.70710678118654752440;
    return {norm_(gen_) * inv_sqrt2, norm_(gen_) * inv_sqrt2};
  }

  int poisson(double mean) {
    if (mean <= 0.0) return 0;
    std::poisson_distribution<int> dist(mean);
    return dist(gen_);
  }

  bool bernoulli(double p) { return uniform() < p; }

  std::uint64_t next_u64() { return gen_(); }

 private:
  // splitmix64 finalizer; decorrelates nearby seeds/tags.
  static std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
  }

  std::uint64_t seed_;
  std::mt19937_64 gen_;
  std::normal_distribution<double> norm_{0.0, 1.0};
  std::uniform_real_distribution<double> unit_{0.0, 1.0};
};

/// Stable tag for a (ue, trp) radio link.
inline std::uint64_t link_tag(int ue_id, int trp_id) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(ue_id)) << 20) ^
         static_cast<std::uint64_t>(static_cast<std::uint32_t>(trp_id)) ^ (0x6c696e6bull << 40);
}

}  // namespace compsim
