#pragma once

#include <cstdint>
#include <random>

namespace evtol {

using Rng = std::mt19937_64;

// splitmix64 finalizer; used to derive independent child seeds from a master
// seed so that episode k of a run is reproducible without replaying 0..k-1.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  return splitmix64(master ^ splitmix64(stream + 0x632BE59BD9B4E019ULL));
}

}  // namespace evtol
