#pragma once

#include <cstdint>

namespace delaydiff {

// splitmix64 step; the de-facto standard 64-bit mixer.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Deterministic substream derivation: same inputs give the same stream seed
// on every platform and under any execution order.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag) {
  std::uint64_t s = base ^ (0xD1B54A32D192ED03ull * (tag + 1));
  std::uint64_t out = splitmix64(s);
  out ^= splitmix64(s);
  return out;
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag_a, std::uint64_t tag_b) {
  return derive_seed(derive_seed(base, tag_a), tag_b);
}

// Fixed purpose tags for the independent streams of one experiment.
namespace stream_tag {
inline constexpr std::uint64_t topology = 0x746F706Full;    // "topo"
inline constexpr std::uint64_t model = 0x6D6F646Cull;       // "modl"
inline constexpr std::uint64_t trial = 0x7472696Cull;       // "tril"
inline constexpr std::uint64_t node = 0x6E6F6465ull;        // "node"
}  // namespace stream_tag

}  // namespace delaydiff
