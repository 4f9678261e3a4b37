#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace live {

// Deterministic random stream. mt19937_64 output is pinned by the standard,
// and the gaussian transform is done here rather than with
// std::normal_distribution (whose draw sequence is implementation defined),
// so identical seeds give identical streams everywhere.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed), seed_(seed) {}

  // Uniform in [0, 1).
  double uniform() {
    return (gen_() >> 11) * (1.0 / 9007199254740992.0);  // 53-bit mantissa
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n).
  uint64_t uniform_index(uint64_t n) {
    const uint64_t limit = UINT64_MAX - UINT64_MAX % n;  // no modulo bias
    uint64_t v;
    do {
      v = gen_();
    } while (v >= limit);
    return v % n;
  }

  // Box-Muller; consumes exactly two uniforms per draw.
  double normal(double mean = 0.0, double std = 1.0) {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    return mean + std * z;
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Derives an independent child stream; gives each robot its own draw
  // sequence so tick interleaving never shifts another robot's noise.
  Rng fork(uint64_t salt) const {
    return Rng(seed_ ^ (salt * 0x9E3779B97F4A7C15ULL + 0xD1B54A32D192ED03ULL));
  }

 private:
  std::mt19937_64 gen_;
  uint64_t seed_;
};

}  // namespace live
