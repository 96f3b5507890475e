#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace assist {

using Rng = std::mt19937_64;

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Derives an independent stream seed from a base seed and a path of tags.
constexpr std::uint64_t derive_seed(std::uint64_t base,
                                    std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = mix64(base);
  for (std::uint64_t tag : path) s = mix64(s ^ mix64(tag + 0x632be59bd9b4e019ULL));
  return s;
}

inline Rng make_rng(std::uint64_t base, std::initializer_list<std::uint64_t> path) {
  return Rng(derive_seed(base, path));
}

// Stream tags shared by the training drivers.
namespace stream {
inline constexpr std::uint64_t kLearner = 1;
inline constexpr std::uint64_t kProvider = 2;
inline constexpr std::uint64_t kInit = 3;
inline constexpr std::uint64_t kData = 4;
inline constexpr std::uint64_t kTestData = 5;
inline constexpr std::uint64_t kEval = 6;
inline constexpr std::uint64_t kEnvs = 7;
inline constexpr std::uint64_t kMetric = 8;
}  // namespace stream

}  // namespace assist
