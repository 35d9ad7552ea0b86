// Copyright (c) 2026 FREEDOM project contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace freedom {

// Seedable RNG. All draws are implemented directly on the engine (no
// distribution objects carrying hidden state), so serializing the engine
// captures the whole stream position and a restored Rng continues
// bit-exactly.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // uniform in [0, 1) with 53-bit resolution
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Marsaglia polar method; the spare deviate is discarded so nothing
  // survives a save/restore boundary.
  double normal() {
    while (true) {
      const double u = 2.0 * uniform01() - 1.0;
      const double v = 2.0 * uniform01() - 1.0;
      const double s = u * u + v * v;
      if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
    }
  }

  std::vector<double> normal_vector(std::size_t n) {
    std::vector<double> out(n);
    for (double& x : out) x = normal();
    return out;
  }

  // unbiased integer in [0, n)
  std::size_t below(std::size_t n) {
    const std::uint64_t span = n;
    const std::uint64_t limit = std::mt19937_64::max() - std::mt19937_64::max() % span;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return static_cast<std::size_t>(x % span);
  }

  // seed for a subsystem rng, advancing this stream
  std::uint64_t fork_seed() { return engine_(); }

  std::string save_state() const;
  void restore_state(const std::string& state);

 private:
  std::mt19937_64 engine_;
};

// Deterministic Fisher-Yates; std::shuffle is implementation-defined.
template <typename T>
void shuffle(std::vector<T>& items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::swap(items[i - 1], items[rng.below(i)]);
  }
}

}  // namespace freedom
