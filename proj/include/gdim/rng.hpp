#pragma once

#include <cstdint>
#include <random>

namespace gdim {

using Seed = std::uint64_t;

/// SplitMix64 finalizer. Used to turn (seed, stream, index) into independent
/// engine seeds so a row's draws never depend on which thread produced them.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Stream tags keep draws for different purposes uncorrelated even when they
/// share a master seed.
enum class Stream : std::uint64_t {
  kSample = 1,
  kSplit = 2,
  kFold = 3,
  kStart = 4,
  kBlocks = 5,
  kTheta = 6,
  kReplicate = 7,
};

constexpr Seed derive_seed(Seed master, Stream stream, std::uint64_t index) noexcept {
  return mix64(mix64(master ^ mix64(static_cast<std::uint64_t>(stream))) + index);
}

/// Engine for one keyed stream (a row of a sampled matrix, a fold, a replicate).
inline std::mt19937_64 stream_engine(Seed master, Stream stream, std::uint64_t index) {
  return std::mt19937_64(derive_seed(master, stream, index));
}

/// Uniform in [0, 1) with 53 random bits.
inline double uniform01(std::mt19937_64& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

/// Poisson(mean) draw. Small means use sequential inversion from a single
/// uniform, which is exact and cheap when most draws are zero.
std::uint64_t poisson_draw(std::mt19937_64& eng, double mean);

/// Binomial(trials, p) draw; exact for every trial count.
std::uint64_t binomial_draw(std::mt19937_64& eng, std::uint64_t trials, double p);

}  // namespace gdim
