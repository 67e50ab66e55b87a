// Seeded random number generation and seed derivation.
#pragma once

#include <cstdint>
#include <random>

namespace hybridcop {

/// SplitMix64 finalizer, used to mix seeds.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of replication `rep` at sample size `n`: a function of
/// (master, n, rep) only, so results do not depend on scheduling.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t n, std::uint64_t rep) {
  return mix64(mix64(mix64(master) ^ n) ^ rep);
}

/// 64-bit Mersenne twister with a portable conversion to doubles. The
/// standard distributions are avoided because their output is not specified
/// bit-for-bit across library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix64(seed)) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform on the open interval (0, 1), on the grid (k + 1/2) 2^-53.
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal by inversion.
  double normal();

 private:
  std::mt19937_64 engine_;
};

}  // namespace hybridcop
