#pragma once

// Counter-based random streams. A stream is identified by a 64-bit key and
// produces splitmix64 outputs of (key + k * golden) for k = 1, 2, ...; child
// keys are derived by hashing (parent key, label) so every consumer draws from
// its own stream regardless of execution order.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace phasesync {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Combines a seed with an integer label into a new, well-mixed seed.
inline constexpr std::uint64_t derive_seed(std::uint64_t seed,
                                           std::uint64_t label) noexcept {
  return splitmix64(splitmix64(seed) ^ (label + 0x632be59bd9b4e019ULL));
}

/// FNV-1a over the label text, then mixed with the seed.
inline constexpr std::uint64_t derive_seed(std::uint64_t seed,
                                           std::string_view label) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : label) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return derive_seed(seed, h);
}

class RandomStream {
 public:
  explicit constexpr RandomStream(std::uint64_t key) noexcept : key_(key) {}
  constexpr RandomStream(std::uint64_t seed, std::string_view label) noexcept
      : key_(derive_seed(seed, label)) {}

  constexpr std::uint64_t next() noexcept {
    ++counter_;
    return splitmix64(key_ + counter_ * 0x9e3779b97f4a7c15ULL);
  }

  /// Uniform on [0, 1) with 53 random bits.
  constexpr double uniform() noexcept {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  /// Uniform angle on [0, 2*pi).
  double angle() noexcept { return 2.0 * std::numbers::pi * uniform(); }

  /// Circularly-symmetric complex Gaussian with E|g|^2 = 1 (real and
  /// imaginary parts independent N(0, 1/2)), one Box-Muller pair per draw.
  std::complex<double> complex_gaussian() noexcept {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double radius = std::sqrt(-std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    return {radius * std::cos(theta), radius * std::sin(theta)};
  }

  constexpr std::uint64_t key() const noexcept { return key_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace phasesync
