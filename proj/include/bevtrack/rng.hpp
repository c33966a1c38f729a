#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace bevtrack {

/// Counter-based deterministic random generator.
///
/// Each draw is a pure function of (key, counter): the SplitMix64 output
/// function applied to key + GOLDEN * counter.  Streams are therefore
/// reproducible across platforms and independent of call-site history, and
/// named substreams can be split off cheaply without sharing state.
/// Distribution sampling (uniform, normal, Poisson) is implemented here
/// rather than via <random> because the standard distributions are not
/// bit-stable across library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : key_(mix64(seed ^ kDomainSalt)) {}

  /// Derives an independent stream from an integer tag.
  Rng substream(std::uint64_t tag) const {
    return Rng(key_ ^ mix64(tag ^ kStreamSalt), 0);
  }

  /// Derives an independent stream from a name, e.g. substream("scenario").
  Rng substream(std::string_view name) const { return substream(fnv1a(name)); }

  std::uint64_t next_u64() { return mix64(key_ + kGolden * ++counter_); }

  /// Uniform double in [0, 1), 53 usable bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n).
  std::uint64_t uniform_index(std::uint64_t n) {
    // Modulo bias is negligible for n << 2^64 and keeps the draw count fixed.
    return next_u64() % n;
  }

  bool bernoulli(double p) { return uniform() < p; }

  /// Standard normal via the Marsaglia polar method (no trig, bit-stable).
  double normal() {
    for (;;) {
      const double u = 2.0 * uniform() - 1.0;
      const double v = 2.0 * uniform() - 1.0;
      const double s = u * u + v * v;
      if (s > 0.0 && s < 1.0) {
        return u * std::sqrt(-2.0 * std::log(s) / s);
      }
    }
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  /// Poisson draw by inversion of exponential gaps; O(mean) draws.
  int poisson(double mean) {
    if (mean <= 0.0) return 0;
    const double limit = std::exp(-mean);
    int k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= uniform();
    } while (p > limit);
    return k - 1;
  }

 private:
  Rng(std::uint64_t key, std::uint64_t counter) : key_(key), counter_(counter) {}

  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;
  static constexpr std::uint64_t kDomainSalt = 0x8C9A4F1D2B3E5A70ull;
  static constexpr std::uint64_t kStreamSalt = 0xD1B54A32D192ED03ull;

  /// SplitMix64 output function.
  static std::uint64_t mix64(std::uint64_t z) {
    z += kGolden;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  static constexpr std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (const char c : s) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001B3ull;
    }
    return h;
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace bevtrack
