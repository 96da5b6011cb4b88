#pragma once

#include <array>
#include <cstdint>

namespace netlqr {

/// Philox4x32-10 counter-based generator (Salmon et al., "Parallel random
/// numbers: as easy as 1, 2, 3").
///
/// Stateless: every 128-bit counter / 64-bit key pair maps to 128 bits of
/// output. Streams are formed by partitioning the counter space, which makes
/// every draw a pure function of (seed, stream, agent, time, component) --
/// simulations are reproducible bit-for-bit no matter how work is split
/// across threads.
struct Philox4x32 {
  static std::array<uint32_t, 4> block(std::array<uint32_t, 4> counter,
                                       std::array<uint32_t, 2> key);
};

/// Independent noise stream kinds used inside a rollout.
enum class NoiseKind : uint32_t {
  Process = 0,      // w(t), plant noise
  Exploration = 1,  // eta(t), injected control noise
};

/// Stream domains. The critic data collection, every actor iteration and the
/// thermal capacitance sampling each get their own Philox key so seeds never
/// collide across purposes.
namespace stream {
constexpr uint32_t critic_data = 0x01000000u;
constexpr uint32_t capacitance = 0x03000000u;
constexpr uint32_t generic = 0x04000000u;
inline constexpr uint32_t actor(uint32_t iteration) { return 0x02000000u | iteration; }
}  // namespace stream

/// Seedable, splittable Gaussian source backed by Philox4x32-10.
class CounterRng {
 public:
  CounterRng(uint64_t seed, uint32_t domain) : seed_(seed), domain_(domain) {}

  /// Standard normal draw for (kind, agent, t, component). Same arguments,
  /// same value, independent of call order.
  double normal(NoiseKind kind, uint32_t agent, uint32_t t, uint32_t component) const;

  /// Uniform draw in [0, 1) addressed the same way.
  double uniform(NoiseKind kind, uint32_t agent, uint32_t t, uint32_t component) const;

  uint64_t seed() const { return seed_; }
  uint32_t domain() const { return domain_; }

 private:
  std::array<uint32_t, 4> raw(NoiseKind kind, uint32_t agent, uint32_t t,
                              uint32_t component) const;
  uint64_t seed_;
  uint32_t domain_;
};

}  // namespace netlqr
