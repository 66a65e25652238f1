#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <utility>

namespace mevo {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11). Every draw is
// a pure function of (seed, stream, index), so parallel generation produces
// the same numbers in any execution order.
namespace philox {

inline std::array<std::uint32_t, 4> block(std::uint64_t seed, std::uint64_t stream,
                                          std::uint64_t index) {
  std::uint32_t k0 = static_cast<std::uint32_t>(seed);
  std::uint32_t k1 = static_cast<std::uint32_t>(seed >> 32);
  std::uint32_t c0 = static_cast<std::uint32_t>(index);
  std::uint32_t c1 = static_cast<std::uint32_t>(index >> 32);
  std::uint32_t c2 = static_cast<std::uint32_t>(stream);
  std::uint32_t c3 = static_cast<std::uint32_t>(stream >> 32);
  for (int round = 0; round < 10; ++round) {
    std::uint64_t p0 = 0xD2511F53ull * c0;
    std::uint64_t p1 = 0xCD9E8D57ull * c2;
    std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
    std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
    std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
    std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
    c0 = hi1 ^ c1 ^ k0;
    c1 = lo1;
    c2 = hi0 ^ c3 ^ k1;
    c3 = lo0;
    k0 += 0x9E3779B9u;
    k1 += 0xBB67AE85u;
  }
  return {c0, c1, c2, c3};
}

// Uniform in [0, 1) from the top 53 bits of one block.
inline double uniform01(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  auto b = block(seed, stream, index);
  std::uint64_t u = (static_cast<std::uint64_t>(b[0]) << 32) | b[1];
  return static_cast<double>(u >> 11) * 0x1p-53;
}

inline double uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t index,
                      double lo, double hi) {
  return lo + (hi - lo) * uniform01(seed, stream, index);
}

// Standard normal pair via Box-Muller; the radial draw is shifted into (0, 1]
// so the logarithm is always finite.
inline std::pair<double, double> normal_pair(std::uint64_t seed, std::uint64_t stream,
                                             std::uint64_t index) {
  auto b = block(seed, stream, index);
  std::uint64_t ua = (static_cast<std::uint64_t>(b[0]) << 32) | b[1];
  std::uint64_t ub = (static_cast<std::uint64_t>(b[2]) << 32) | b[3];
  double u1 = (static_cast<double>(ua >> 11) + 1.0) * 0x1p-53;
  double u2 = static_cast<double>(ub >> 11) * 0x1p-53;
  double r = std::sqrt(-2.0 * std::log(u1));
  double a = 6.283185307179586476925286766559 * u2;
  return {r * std::cos(a), r * std::sin(a)};
}

inline double normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  return normal_pair(seed, stream, index).first;
}

}  // namespace philox
}  // namespace mevo
