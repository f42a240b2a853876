#pragma once

// Counter-based random streams. Every (seed, replica, purpose) triple names an
// independent Philox4x32-10 stream, so replicas can be generated on any worker
// in any order and still reproduce bit-for-bit.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace lilmc {

using Philox4x32Counter = std::array<std::uint32_t, 4>;
using Philox4x32Key = std::array<std::uint32_t, 2>;

/// Philox4x32 with ten rounds (Salmon et al., Random123).
inline Philox4x32Counter philox4x32_10(Philox4x32Counter ctr, Philox4x32Key key) {
  constexpr std::uint32_t kMul0 = 0xD2511F53u;
  constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
    const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

/// Tags separating the streams used by different pipeline stages.
enum class StreamPurpose : std::uint32_t {
  simulate = 1,
  initial = 2,
  certify = 3,
  corrector = 4,
  variance = 5,
  ensemble = 6,
  probe = 7,
  control = 8,
  borel_cantelli = 9,
  moments = 10,
  stationary = 11,
};

/// Sequential view over one counter-based stream. Satisfies
/// UniformRandomBitGenerator, but the library only draws through uniform()
/// and normal() so that the number of draws per call is fixed.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  RandomStream(std::uint64_t seed, std::uint32_t replica, StreamPurpose purpose)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        replica_(replica),
        purpose_(static_cast<std::uint32_t>(purpose)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    if (lane_ == 2) {
      block_ = philox4x32_10({static_cast<std::uint32_t>(counter_),
                              static_cast<std::uint32_t>(counter_ >> 32), replica_, purpose_},
                             key_);
      ++counter_;
      lane_ = 0;
    }
    const std::uint64_t out =
        (std::uint64_t{block_[2 * lane_ + 1]} << 32) | std::uint64_t{block_[2 * lane_]};
    ++lane_;
    return out;
  }

  /// Uniform on the open interval (0,1) with 53 random bits; one draw.
  double uniform() {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal by Box-Muller; always two draws.
  double normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  std::uint64_t draws() const { return 2 * counter_ - (2 - lane_); }

 private:
  Philox4x32Key key_;
  std::uint32_t replica_;
  std::uint32_t purpose_;
  std::uint64_t counter_ = 0;
  Philox4x32Counter block_{};
  int lane_ = 2;
};

}  // namespace lilmc
