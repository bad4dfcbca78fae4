#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace chernoff_sbm {

/// Counter-based generator: the i-th draw of stream (seed, stream) is
/// splitmix64_finalize(key + (i + 1) * golden_gamma), where key is derived
/// from (seed, stream) by the same finalizer. Every draw is a pure function of
/// (seed, stream, i), so any partition of work across streams reproduces the
/// serial result bit-for-bit on every platform. Floating-point conversion and
/// integer ranges are done here rather than through <random> distributions,
/// whose output is implementation-defined.
class CounterRng {
 public:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(mix(mix(seed) ^ (stream * 0xD1B54A32D192ED03ULL + kGamma))) {}

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t next_u64() {
    ++counter_;
    return mix(key_ + counter_ * kGamma);
  }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  /// Unbiased integer in [0, bound) (Lemire's multiply-and-reject).
  std::uint64_t below(std::uint64_t bound) {
    std::uint64_t x = next_u64();
    __uint128_t m = static_cast<__uint128_t>(x) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        x = next_u64();
        m = static_cast<__uint128_t>(x) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Derives a child seed; used for per-trial and per-node streams.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  return CounterRng::mix(CounterRng::mix(seed + CounterRng::kGamma) ^ CounterRng::mix(tag + 1));
}

}  // namespace chernoff_sbm
