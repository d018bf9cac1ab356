#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace qrfcast {

/// Seedable, platform-portable random stream.
///
/// std::mt19937_64 has a fully specified output sequence, but the standard
/// distributions do not, so the conversions to uniform/normal/integer draws are
/// done here explicitly.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  /// Stream for a sub-task (e.g. one tree): seed + index.
  static RandomStream derived(std::uint64_t seed, std::uint64_t index) { return RandomStream(seed + index); }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in the open interval (0, 1).
  double uniform() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }

  /// Uniform integer in [0, n). Rejection sampling keeps it unbiased.
  std::uint64_t below(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = (~std::uint64_t{0}) - ((~std::uint64_t{0}) % n);
    std::uint64_t x = 0;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  /// Standard normal draw (Box-Muller, one value per call).
  double normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace qrfcast
