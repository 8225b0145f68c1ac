#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace wbs {

// The standard distribution objects are implementation-defined, so variates
// are built from raw mt19937_64 output to keep results identical across
// standard libraries.

/// Uniform on [0, 1) with 53 random bits.
inline double uniform01(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

/// Unit-mean exponential.
inline double exponential01(std::mt19937_64& gen) { return -std::log1p(-uniform01(gen)); }

/// SplitMix64 finaliser; used to derive independent per-task seeds.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace wbs
