#pragma once

#include <cmath>
#include <cstdint>

namespace convext {

// splitmix64: tiny, portable, and identical on every platform. All random
// draws in the library flow from one config seed through this generator, so
// runs reproduce bit-for-bit regardless of the C++ stdlib in use.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1), 53-bit resolution.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller on two uniform draws.
  double next_normal() {
    double u1 = 0.0;
    while (u1 == 0.0) u1 = next_double();
    double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
  }

 private:
  std::uint64_t state_;
};

// Derive an independent stream seed for restart/worker index k.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t k) {
  SplitMix64 g(seed ^ (0xD1B54A32D192ED03ULL * (k + 1)));
  return g.next_u64();
}

}  // namespace convext
