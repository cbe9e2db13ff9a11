// Copyright 2026 The fusekit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

// common/rng.h

#ifndef FUSEKIT_COMMON_RNG_H_
#define FUSEKIT_COMMON_RNG_H_

#include <cstdint>
#include <random>
#include <string_view>

namespace fusekit {

/// Seeded random source with platform-independent draws.
///
/// std::mt19937_64 is fully specified by the standard, but the std
/// distributions are not, so every draw here is derived from raw engine
/// output. Two Rng objects with the same seed produce identical streams on
/// any conforming implementation.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t NextU64() { return engine_(); }
  /// Uniform in [0, 1).
  double Uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  /// Uniform in [lo, hi]; returns lo when lo == hi.
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }
  /// Uniform integer in [lo, hi] inclusive.
  int64_t UniformInt(int64_t lo, int64_t hi);
  bool Bernoulli(double p) { return Uniform() < p; }
  /// Standard normal via Box-Muller (no cached second value).
  double Normal();
  /// Draws an index from unnormalized non-negative weights.
  template <typename Container>
  size_t Categorical(const Container &weights);

 private:
  std::mt19937_64 engine_;
};

/// Mixes a base seed with a string key (e.g. an utterance id) so that
/// per-item streams do not depend on processing order.
uint64_t DeriveSeed(uint64_t base, std::string_view key);
uint64_t DeriveSeed(uint64_t base, uint64_t key);

template <typename Container>
size_t Rng::Categorical(const Container &weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  double r = Uniform() * total;
  size_t last_positive = 0;
  size_t i = 0;
  for (double w : weights) {
    if (w > 0.0) {
      if (r < w) return i;
      last_positive = i;
    }
    r -= w;
    ++i;
  }
  return last_positive;
}

}  // namespace fusekit

#endif  // FUSEKIT_COMMON_RNG_H_
