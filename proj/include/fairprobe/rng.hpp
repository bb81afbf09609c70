#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace fairprobe {

// Deterministic RNG wrapper. All draws go through raw 64-bit output of
// std::mt19937_64 (fully specified by the standard), so streams are
// bit-identical across platforms and standard-library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform double in [0, 1) with 53 bits of randomness.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller (deterministic, no cached state).
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.141592653589793238462643 * u2);
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Inverse-CDF categorical draw over the probabilities as stored; the
  // vector is assumed validated (non-negative, sums to ~1).
  std::size_t categorical(const std::vector<double>& probs) {
    const double u = uniform();
    double cum = 0.0;
    for (std::size_t k = 0; k + 1 < probs.size(); ++k) {
      cum += probs[k];
      if (u < cum) return k;
    }
    return probs.empty() ? 0 : probs.size() - 1;
  }

 private:
  std::mt19937_64 engine_;
};

// SplitMix64-style mixing, used to derive independent per-replication
// seeds from (master seed, replication index).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace fairprobe
