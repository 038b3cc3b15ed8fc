#pragma once

#include <array>
#include <cstdint>

namespace hck {

// Philox4x64-10 counter-based block function (Salmon et al., SC'11).
std::array<std::uint64_t, 4> philox4x64(std::array<std::uint64_t, 4> counter,
                                        std::array<std::uint64_t, 2> key);

// A deterministic stream of random numbers addressed by (seed, stream,
// substream). Distinct addresses give statistically independent streams, so
// parallel work derives its randomness from its index rather than from a
// shared generator.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream, std::uint64_t substream = 0)
      : key_{seed, stream}, substream_(substream) {}

  std::uint64_t next_u64();

  // Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform();

  // Standard normal by inversion of the CDF.
  double normal();

  // Uniform integer in [0, bound); bound > 0.
  std::uint64_t below(std::uint64_t bound);

 private:
  std::array<std::uint64_t, 2> key_;
  std::uint64_t substream_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 4> buffer_{};
  unsigned used_ = 4;
};

// Stream identifiers for the different consumers of a seed.
namespace streams {
inline constexpr std::uint64_t kReplication = 1;
inline constexpr std::uint64_t kFixedDesign = 2;
inline constexpr std::uint64_t kBootstrap = 3;
inline constexpr std::uint64_t kCalibration = 4;
}  // namespace streams

}  // namespace hck
