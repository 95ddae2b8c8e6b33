#pragma once

#include <cstdint>
#include <random>

namespace fbnc {

// Named-stream RNG. Each stream is an mt19937_64 seeded from (seed, tag)
// through splitmix64, so adding receivers or changing modules never
// perturbs the other streams. Draws avoid std::*_distribution to stay
// bit-reproducible across standard libraries.
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream_tag)
      : eng_(mix(seed, stream_tag)) {}

  std::uint64_t next() { return eng_(); }

  bool bernoulli(double p) {
    double u = double(eng_() >> 11) * 0x1.0p-53;
    return u < p;
  }

  // Uniform in [0, n), n >= 1.
  std::uint32_t below(std::uint32_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = eng_();
    } while (x >= limit);
    return std::uint32_t(x % n);
  }

  static std::uint64_t mix(std::uint64_t seed, std::uint64_t tag) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (tag + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace fbnc
