#pragma once

// Counter-based random streams. Every variate is a pure function of
// (seed, stream, substream, position), so generation order and thread count
// never change the numbers drawn.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace noma {

/// Philox4x32 with 10 rounds (Salmon et al., "Parallel random numbers: as
/// easy as 1, 2, 3").
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter generate(Counter ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
      const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const auto lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const auto lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85;
};

/// Sequential view of one Philox substream keyed by (seed, stream, substream).
/// Counter words: {block, substream, stream_lo, stream_hi}.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream, std::uint32_t substream = 0)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        substream_(substream),
        stream_(stream) {}

  std::uint64_t next_u64() {
    if (cursor_ == 2) refill();
    return buffer_[cursor_++];
  }

  /// Uniform on the open interval (0, 1) with 53 random bits.
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Exp(1) variate.
  double exponential() { return -std::log(uniform()); }

  /// Standard normal (Box-Muller, one value per call).
  double normal() {
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    return r * std::cos(2.0 * std::numbers::pi * uniform());
  }

  /// +1 or -1 with equal probability.
  int sign() { return (next_u64() >> 63) != 0 ? 1 : -1; }

  /// Uniform integer in [0, n), unbiased (Lemire's multiply-and-reject).
  std::uint64_t uniform_int(std::uint64_t n) {
    unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
      const std::uint64_t threshold = (0 - n) % n;
      while (low < threshold) {
        m = static_cast<unsigned __int128>(next_u64()) * n;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  /// Binomial(trials, p) by CDF inversion from zero; meant for small means.
  std::uint64_t binomial(std::uint64_t trials, double p) {
    if (trials == 0 || p <= 0.0) return 0;
    if (p >= 1.0) return trials;
    const double q = 1.0 - p;
    double pk = std::exp(static_cast<double>(trials) * std::log1p(-p));
    if (pk == 0.0) {
      // Mean too large for inversion from k = 0; count Bernoulli trials.
      std::uint64_t hits = 0;
      for (std::uint64_t i = 0; i < trials; ++i) hits += uniform() < p ? 1 : 0;
      return hits;
    }
    const double u = uniform();
    double cdf = pk;
    std::uint64_t k = 0;
    while (u > cdf && k < trials) {
      pk *= static_cast<double>(trials - k) / static_cast<double>(k + 1) * p / q;
      ++k;
      cdf += pk;
      if (pk == 0.0) break;
    }
    return k;
  }

  /// Poisson(mean) by CDF inversion; meant for moderate means.
  std::uint64_t poisson(double mean) {
    if (mean <= 0.0) return 0;
    double pk = std::exp(-mean);
    const double u = uniform();
    double cdf = pk;
    std::uint64_t k = 0;
    while (u > cdf && pk > 0.0) {
      ++k;
      pk *= mean / static_cast<double>(k);
      cdf += pk;
    }
    return k;
  }

 private:
  void refill() {
    const Philox4x32::Counter ctr{block_, substream_, static_cast<std::uint32_t>(stream_),
                                  static_cast<std::uint32_t>(stream_ >> 32)};
    const auto out = Philox4x32::generate(ctr, key_);
    buffer_[0] = (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
    buffer_[1] = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
    ++block_;
    cursor_ = 0;
  }

  Philox4x32::Key key_;
  std::uint32_t substream_;
  std::uint64_t stream_;
  std::uint32_t block_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int cursor_ = 2;
};

}  // namespace noma
