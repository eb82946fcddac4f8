#pragma once

// Counter-based random streams. Every draw is a pure function of
// (seed, stream tag, id, counter), so results never depend on the order in
// which particles or paths are processed.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

#include "apspic/core_model.hpp"

namespace apspic {

/// Philox4x32-10 (Salmon et al., SC'11).
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  explicit constexpr Philox4x32(Key key) : key_(key) {}

  constexpr Counter operator()(Counter ctr) const {
    Key k = key_;
    for (int round = 0; round < 10; ++round) {
      ctr = single_round(ctr, k);
      k[0] += kWeyl0;
      k[1] += kWeyl1;
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  static constexpr Counter single_round(const Counter& c, const Key& k) {
    const std::uint64_t p0 = std::uint64_t{kMul0} * c[0];
    const std::uint64_t p1 = std::uint64_t{kMul1} * c[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }

  Key key_;
};

/// Separates independent uses of the same master seed.
enum class StreamTag : std::uint64_t {
  push_noise = 1,
  init_position = 2,
  init_velocity = 3,
  path_noise = 4,
  test = 99,
};

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// 53 random bits mapped to (0, 1]; never returns 0, so log() is safe.
constexpr double to_unit_open_low(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = ((std::uint64_t{hi} << 32) | lo) >> 11;
  return (static_cast<double>(bits) + 1.0) * 0x1.0p-53;
}

}  // namespace detail

/// Keyed stream of uniform and Gaussian pairs.
class NoiseStream {
 public:
  constexpr NoiseStream(std::uint64_t seed, StreamTag tag)
      : philox_(make_key(seed, tag)) {}

  /// Two independent uniforms in (0, 1] for (id, counter).
  std::array<double, 2> uniform_pair(std::uint64_t id, std::uint64_t counter) const {
    const auto out = philox_({static_cast<std::uint32_t>(id), static_cast<std::uint32_t>(id >> 32),
                              static_cast<std::uint32_t>(counter),
                              static_cast<std::uint32_t>(counter >> 32)});
    return {detail::to_unit_open_low(out[0], out[1]), detail::to_unit_open_low(out[2], out[3])};
  }

  /// Two independent standard normals (Box-Muller) for (id, counter).
  Vec2d gaussian_pair(std::uint64_t id, std::uint64_t counter) const {
    const auto u = uniform_pair(id, counter);
    const double r = std::sqrt(-2.0 * std::log(u[0]));
    const double theta = 2.0 * std::numbers::pi * u[1];
    return {r * std::cos(theta), r * std::sin(theta)};
  }

 private:
  static constexpr Philox4x32::Key make_key(std::uint64_t seed, StreamTag tag) {
    const std::uint64_t k = detail::splitmix64(seed ^ detail::splitmix64(static_cast<std::uint64_t>(tag)));
    return {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
  }

  Philox4x32 philox_;
};

}  // namespace apspic
