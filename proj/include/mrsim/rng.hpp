#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace mrsim {

// Deterministic draw streams. Every stochastic feature of a run (block
// placement, failure injection, synthetic workloads) pulls from its own
// named stream, so adding draws to one feature never shifts another's
// sequence for the same scenario seed.
//
// The generator is fully pinned so an independent reimplementation can
// replay any stream:
//   state  = mt19937_64 seeded with splitmix64(seed ^ fnv1a64(name))
//   u64    = next engine output
//   below(n) = unbiased modulo: draw u64, reject while u64 - u64 % n
//              would wrap past the largest multiple of n
//   unit() = (u64 >> 11) * 2^-53, uniform in [0, 1)
class SeedStream {
 public:
  SeedStream(std::uint64_t seed, std::string_view name)
      : engine_(splitmix64(seed ^ fnv1a64(name))) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform integer in [0, n). n must be > 0.
  std::uint64_t next_below(std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return x % n;
  }

  // Uniform double in [0, 1).
  double next_unit() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  static std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    return h;
  }

  static std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace mrsim
