#pragma once

#include <cstdint>

namespace bsam {

// SplitMix64 finalizer; used to derive independent, reproducible seeds for
// separate RNG streams (init, shuffle, data, diagnostics) from one base seed.
constexpr std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  return mix_seed(mix_seed(base) ^ mix_seed(stream + 0x51ED270B27A1ull));
}

namespace streams {
inline constexpr std::uint64_t kInit = 1;
inline constexpr std::uint64_t kShuffle = 2;
inline constexpr std::uint64_t kData = 3;
inline constexpr std::uint64_t kDiagnostics = 4;
}  // namespace streams

}  // namespace bsam
