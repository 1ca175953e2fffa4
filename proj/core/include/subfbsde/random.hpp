#pragma once

#include <cstdint>
#include <random>

namespace subfbsde {

/// Stream tags keep the clock, Brownian and auxiliary substreams of one path
/// disjoint even when they share the scenario seed and path index.
enum class StreamTag : std::uint64_t {
  clock = 0x636c6f636bULL,
  brownian = 0x62726f776eULL,
  sampler = 0x73616d706cULL,
  bootstrap = 0x626f6f74ULL,
};

/// SplitMix64 finaliser.
std::uint64_t mix64(std::uint64_t z) noexcept;

/// Seed for the substream (seed, tag, index); a pure function of its inputs.
std::uint64_t substream_seed(std::uint64_t seed, StreamTag tag, std::uint64_t index) noexcept;

/// Uniform / exponential / Gaussian draws on top of a 64-bit Mersenne twister.
/// Gaussians come from Box-Muller so the output is identical across standard
/// library implementations.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}
  RandomStream(std::uint64_t seed, StreamTag tag, std::uint64_t index)
      : engine_(substream_seed(seed, tag, index)) {}

  /// Uniform on the open interval (0, 1).
  double uniform() noexcept;
  double exponential(double rate) noexcept;
  double normal() noexcept;
  std::uint64_t next_u64() noexcept { return engine_(); }

 private:
  std::mt19937_64 engine_;
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace subfbsde
