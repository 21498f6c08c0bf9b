#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "uq/math/special.hpp"

namespace uq {

/// Seeded random stream. All library randomness flows through this type so
/// that identical seeds give bit-identical results on any platform: the
/// mt19937_64 output sequence is fixed by the standard and every derived draw
/// below is computed from raw 64-bit words without implementation-defined
/// <random> distributions.
///
/// Parallel contract: a master seed plus a stream index defines a child
/// stream via derive(master, index) = master + index. Chain i of an MCMC run
/// with seed s therefore draws from RandomStream(s + i).
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }
  static constexpr const char* generator_id() { return "mt19937_64"; }

  static std::uint64_t derive(std::uint64_t master, std::uint64_t index) {
    return master + index;
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0,1) with 53-bit resolution.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform on (0,1), never exactly 0 or 1.
  double uniform01_open() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Standard normal draw by inversion.
  double normal() { return math::standard_normal_icdf(uniform01_open()); }

  /// Unbiased integer in [0, n) by rejection.
  std::uint64_t uniform_index(std::uint64_t n) {
    if (n == 0) throw invalid_argument_error("uniform_index: n must be > 0");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  /// In-place Fisher-Yates shuffle driven by this stream.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i)
      std::swap(v[i - 1], v[uniform_index(i)]);
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

/// Provenance of a sample set: the generator and the seed that produced it.
struct SeedRecord {
  std::string generator = RandomStream::generator_id();
  std::uint64_t seed = 0;
};

}  // namespace uq
