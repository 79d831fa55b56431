#pragma once

#include <cstdint>
#include <random>

namespace steering {

// splitmix64 mix step. Used to derive independent sub-seeds (per bootstrap
// trial, per setting pair) from a master seed, so that results are identical
// no matter how the work is sharded or ordered.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return mix64(master ^ mix64(index + 1));
}

inline std::mt19937_64 make_engine(std::uint64_t seed) {
  return std::mt19937_64(seed);
}

// Default worker count for the embarrassingly parallel searches; reads the
// STEERKIT_THREADS environment variable, falling back to 1.
int default_thread_count();

}  // namespace steering
