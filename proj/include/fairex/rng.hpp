// Copyright 2026 The fairex authors
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
#include <initializer_list>
#include <random>
#include <vector>

namespace fairex {

// splitmix64 mixing step (public-domain constants). Used only to derive
// well-separated child seeds, never as the sampling engine itself.
inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Derives a child seed from a master seed and an ordered tag list, e.g.
// derive_seed(master, {kSplitStream, iteration, user_ordinal}). The chain is
// order-sensitive so (a,b) and (b,a) give unrelated streams.
inline uint64_t derive_seed(uint64_t seed, std::initializer_list<uint64_t> tags) {
  uint64_t h = splitmix64(seed);
  for (uint64_t t : tags) h = splitmix64(h ^ splitmix64(t));
  return h;
}

// Deterministic random stream. std::mt19937_64 output is pinned by the
// standard, but std::*_distribution is implementation-defined, so every
// sampler below is built directly on raw engine words. This keeps artifacts
// byte-identical across toolchains and thread counts.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next_u64() { return engine_(); }

  // Unbiased integer in [0, n) via rejection sampling. n must be positive.
  uint64_t below(uint64_t n) {
    // Rejection threshold = 2^64 mod n; values under it would bias the tail.
    const uint64_t threshold = (0ULL - n) % n;
    for (;;) {
      const uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

  // Integer in [lo, hi], both ends inclusive.
  int64_t uniform_int(int64_t lo, int64_t hi) {
    return lo + static_cast<int64_t>(below(static_cast<uint64_t>(hi - lo) + 1));
  }

  // Real in [0, 1) with 53 random bits.
  double uniform_real() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Real in [lo, hi).
  double uniform_real(double lo, double hi) {
    return lo + (hi - lo) * uniform_real();
  }

  // Standard normal deviate via Box-Muller; the paired variate is cached.
  double normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    // u1 in (0, 1] so the logarithm is finite.
    const double u1 =
        (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = uniform_real();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    cached_ = r * std::sin(theta);
    has_cached_ = true;
    return r * std::cos(theta);
  }

  // In-place Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      const size_t j = static_cast<size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

// Stream tags for derive_seed. Centralized so no two call sites collide.
namespace seed_stream {
constexpr uint64_t kSplit = 0x01;
constexpr uint64_t kModel = 0x02;
constexpr uint64_t kAcceptance = 0x03;
constexpr uint64_t kRerank = 0x04;
}  // namespace seed_stream

}  // namespace fairex
