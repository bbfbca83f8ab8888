#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace diffatd {

/// Well-known stream identifiers. Every stochastic consumer in an episode
/// draws from its own stream so results do not depend on evaluation order.
namespace stream {
inline constexpr std::uint64_t kScene = 1;
inline constexpr std::uint64_t kPolicy = 2;
inline constexpr std::uint64_t kObservationNoise = 3;
inline constexpr std::uint64_t kRewardInit = 4;
inline constexpr std::uint64_t kParticleBase = 1000;  // + particle index
}  // namespace stream

/// One step of the splitmix64 sequence; advances `state`.
std::uint64_t splitmix64(std::uint64_t& state);

/// Seed for sub-stream `stream_id` of a root seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream_id);

/// A seeded mt19937_64 plus the distributions drawn from it.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}
  RandomStream(std::uint64_t seed, std::uint64_t stream_id)
      : engine_(derive_seed(seed, stream_id)) {}

  double normal() { return normal_(engine_); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform integer in [0, n). Rejection sampling on raw 64-bit outputs, so
  /// the result is identical across standard library implementations.
  std::size_t index(std::size_t n);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace diffatd
