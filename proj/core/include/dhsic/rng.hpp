#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

namespace dhsic::rng {

// splitmix64 finalizer; used to spread (seed, stream) pairs over the engine
// seed space so counter-based substreams are decorrelated.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
  return mix64(mix64(seed) ^ mix64(stream * 0xda942042e4dd58b5ULL + 1));
}

// Deterministic random stream. The engine (std::mt19937_64) is fully
// specified by the standard; the std::*_distribution adaptors are not, so all
// samplers are implemented here and consume a fixed number of engine draws.
class Stream {
 public:
  explicit Stream(std::uint64_t seed, std::uint64_t stream = 0)
      : gen_(derive(seed, stream)) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform on [0, 1): 53 mantissa bits.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  // Unbiased uniform integer in {0, ..., n-1} via rejection.
  std::uint64_t below(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t threshold = -n % n;  // 2^64 mod n
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

  // Standard normal via Box-Muller; consumes exactly two engine draws and
  // discards the sine partner to keep the stream stateless.
  double normal() {
    const double u1 =
        (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
    const double u2 = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  int binomial(int trials, double p) {
    int k = 0;
    for (int t = 0; t < trials; ++t) k += uniform01() < p ? 1 : 0;
    return k;
  }

  // In-place Fisher-Yates; with perm = {0..n-1} yields a uniform permutation.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace dhsic::rng

namespace dhsic {
using rng::derive;
using rng::Stream;
}  // namespace dhsic
