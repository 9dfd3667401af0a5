#pragma once

// Deterministic random streams. Everything in the library draws from these
// instead of <random> distributions, whose sequences are not pinned by the
// standard; results must be bit-identical for a given seed on every build.

#include <cstdint>
#include <cmath>
#include <span>
#include <vector>

namespace coev {

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ull;

// splitmix64 finalizer: a strong 64-bit mixing function.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

// Derives a child seed from a base seed and any number of integer tags.
// Order-sensitive: derive_seed(s, a, b) != derive_seed(s, b, a) in general.
template <typename... Parts>
constexpr std::uint64_t derive_seed(std::uint64_t base, Parts... parts) {
  ((base = mix64(base ^ (static_cast<std::uint64_t>(parts) + kGoldenGamma))), ...);
  return mix64(base);
}

// Maps a 64-bit word to a double in [0, 1) using its top 53 bits.
constexpr double unit_from_bits(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// splitmix64 generator. Small, fast, and reproducible everywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += kGoldenGamma;
    return mix64(state_);
  }

  // Uniform in [0, 1).
  double uniform01() { return unit_from_bits(next_u64()); }

  // Uniform in (0, 1]; safe as a log() argument.
  double uniform01_open() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }

  bool bernoulli(double p) { return uniform01() < p; }

  // Uniform integer in [0, n). Lemire multiply-shift with rejection (unbiased).
  std::uint64_t below(std::uint64_t n) {
    unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * n;
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < n) {
      const std::uint64_t threshold = (0 - n) % n;
      while (lo < threshold) {
        m = static_cast<unsigned __int128>(next_u64()) * n;
        lo = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  int below_int(int n) { return static_cast<int>(below(static_cast<std::uint64_t>(n))); }

  // Standard normal via Box-Muller (one draw per call; no cached spare, so the
  // stream position is a simple function of the call count).
  double gaussian() {
    const double u1 = uniform01_open();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  double gaussian(double mean, double sd) { return mean + sd * gaussian(); }

  // Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    shuffle(std::span<T>(items));
  }

  // k distinct integers sampled uniformly from {0..n-1} \ excluded indices.
  // Partial Fisher-Yates over a scratch index table; order of the result is
  // itself random (callers must not rely on it being sorted).
  void sample_distinct(int k, int n, std::vector<int>& out, int exclude = -1) {
    scratch_.clear();
    scratch_.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      if (i != exclude) scratch_.push_back(i);
    }
    const int avail = static_cast<int>(scratch_.size());
    out.clear();
    for (int i = 0; i < k && i < avail; ++i) {
      const int j = i + below_int(avail - i);
      std::swap(scratch_[static_cast<std::size_t>(i)], scratch_[static_cast<std::size_t>(j)]);
      out.push_back(scratch_[static_cast<std::size_t>(i)]);
    }
  }

  std::uint64_t state() const { return state_; }

 private:
  std::uint64_t state_;
  std::vector<int> scratch_;
};

}  // namespace coev
