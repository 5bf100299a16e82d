#pragma once

#include <cstdint>
#include <random>

namespace cgmkit {

// splitmix64; used both as a bit mixer and to derive independent seed
// streams from one user-facing seed.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Named sub-streams so modules never share RNG state by accident.
enum class Stream : std::uint64_t {
  placement = 0x706c6163,   // building footprints
  heights = 0x68656967,     // building heights
  shadow = 0x73686164,      // shadowing field
  bs_sampling = 0x62736c6f, // BS location draws
  test_split = 0x74737074,  // test index selection
  train_subset = 0x7472616e,
  model_init = 0x696e6974,
  shuffle = 0x73686666,
};

inline std::uint64_t derive_seed(std::uint64_t seed, Stream stream) {
  return mix64(seed ^ (static_cast<std::uint64_t>(stream) * 0x9e3779b97f4a7c15ull));
}

inline std::mt19937_64 make_rng(std::uint64_t seed, Stream stream) {
  return std::mt19937_64(derive_seed(seed, stream));
}

// Uniform in (0, 1): never returns 0 so it can feed log(1-u) transforms.
inline double open_unit(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1p-53;
}

// Deterministic standard normal attached to an integer lattice node.
// Hash -> two uniforms -> Box-Muller; no state, no storage.
inline double lattice_normal(std::uint64_t seed, std::int64_t gx, std::int64_t gy, std::int64_t gz) {
  std::uint64_t h = mix64(seed ^ mix64(static_cast<std::uint64_t>(gx) * 0x8da6b343ull ^
                                       static_cast<std::uint64_t>(gy) * 0xd8163841ull ^
                                       static_cast<std::uint64_t>(gz) * 0xcb1ab31full));
  std::uint64_t h2 = mix64(h);
  double u1 = (static_cast<double>(h >> 11) + 0.5) * 0x1p-53;
  double u2 = (static_cast<double>(h2 >> 11) + 0.5) * 0x1p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

}  // namespace cgmkit
