#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <utility>

namespace seqjsp {

/// Seeded pseudo-random stream with portable integer/real draws.
///
/// std::uniform_int_distribution and std::shuffle are implementation-defined,
/// so datasets would differ between standard libraries. The draws here only
/// depend on the raw mt19937_64 output, which the standard pins down.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Sub-stream keyed by (seed, keys...). Used e.g. for one stream per job.
  static Rng derive(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) {
    std::uint64_t h = mix(seed ^ 0x9e3779b97f4a7c15ULL);
    for (auto k : keys) h = mix(h ^ (k + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2)));
    return Rng(h);
  }

  std::uint64_t next() { return engine_(); }

  /// Uniform integer in [lo, hi], rejection sampling (no modulo bias).
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    if (span == 0) return static_cast<std::int64_t>(next());
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
    std::uint64_t x;
    do {
      x = next();
    } while (x >= limit);
    return lo + static_cast<std::int64_t>(x % span);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  template <typename T>
  void shuffle(std::span<T> xs) {
    for (std::size_t i = xs.size(); i > 1; --i) {
      auto j = static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(i) - 1));
      std::swap(xs[i - 1], xs[j]);
    }
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    // splitmix64 finalizer
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::mt19937_64 engine_;
};

}  // namespace seqjsp
