#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

// Counter-based Philox4x32-10: the output depends only on (key, counter),
// so streams can be addressed by (path, player, step) in any order.
namespace rnash::rng {

using Counter = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

[[nodiscard]] inline Counter philox4x32(Counter ctr, Key key) {
  constexpr std::uint32_t kM0 = 0xD2511F53u, kM1 = 0xCD9E8D57u;
  constexpr std::uint32_t kW0 = 0x9E3779B9u, kW1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
    ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
           static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
    key[0] += kW0;
    key[1] += kW1;
  }
  return ctr;
}

[[nodiscard]] inline Key key_from_seed(std::uint64_t seed) {
  return {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
}

// Uniform in (0, 1): 32 random bits centered in their bucket.
[[nodiscard]] inline double to_open_unit(std::uint32_t u) { return (u + 0.5) * 0x1p-32; }

// Four standard normals (two Box-Muller pairs) for one counter.
[[nodiscard]] inline std::array<double, 4> normals4(const Counter& ctr, const Key& key) {
  const Counter u = philox4x32(ctr, key);
  std::array<double, 4> out{};
  for (int p = 0; p < 2; ++p) {
    const double rad = std::sqrt(-2.0 * std::log(to_open_unit(u[2 * p])));
    const double ang = 2.0 * std::numbers::pi * to_open_unit(u[2 * p + 1]);
    out[2 * p] = rad * std::cos(ang);
    out[2 * p + 1] = rad * std::sin(ang);
  }
  return out;
}

// Four uniforms in (0, 1) for one counter.
[[nodiscard]] inline std::array<double, 4> uniforms4(const Counter& ctr, const Key& key) {
  const Counter u = philox4x32(ctr, key);
  return {to_open_unit(u[0]), to_open_unit(u[1]), to_open_unit(u[2]), to_open_unit(u[3])};
}

}  // namespace rnash::rng
