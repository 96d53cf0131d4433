#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace yyf {

// Counter-based generator: every draw is a pure function of (key, counter), so
// Monte-Carlo replicas do not depend on execution order.
inline constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Stream purposes keep draws for different roles of the same path apart.
enum class Stream : std::uint64_t {
  initial = 1,
  state_noise = 2,
  observation_noise = 3,
  resampling = 4,
  bootstrap = 5,
  increments = 6,
};

class CounterRng {
 public:
  constexpr CounterRng(std::uint64_t seed, std::uint64_t path, Stream stream) noexcept
      : key_(mix64(mix64(mix64(seed) ^ (path * 0xd1b54a32d192ed03ULL)) ^
                   static_cast<std::uint64_t>(stream))) {}

  constexpr std::uint64_t bits(std::uint64_t counter) const noexcept {
    return mix64(key_ ^ mix64(counter));
  }

  /// Uniform on the open interval (0, 1).
  double uniform(std::uint64_t counter) const noexcept {
    return (static_cast<double>(bits(counter) >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal draw number `index` (Box-Muller on two hashed uniforms).
  double normal(std::uint64_t index) const noexcept {
    const double u1 = uniform(2 * index);
    const double u2 = uniform(2 * index + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::uint64_t key_;
};

}  // namespace yyf
