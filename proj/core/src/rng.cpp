#include "netlqr/rng.hpp"

#include <cmath>

namespace netlqr {

namespace {

constexpr uint32_t kMult0 = 0xD2511F53u;
constexpr uint32_t kMult1 = 0xCD9E8D57u;
constexpr uint32_t kWeyl0 = 0x9E3779B9u;
constexpr uint32_t kWeyl1 = 0xBB67AE85u;

inline void round_once(std::array<uint32_t, 4>& c, const std::array<uint32_t, 2>& k) {
  const uint64_t p0 = static_cast<uint64_t>(kMult0) * c[0];
  const uint64_t p1 = static_cast<uint64_t>(kMult1) * c[2];
  const uint32_t hi0 = static_cast<uint32_t>(p0 >> 32), lo0 = static_cast<uint32_t>(p0);
  const uint32_t hi1 = static_cast<uint32_t>(p1 >> 32), lo1 = static_cast<uint32_t>(p1);
  c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

}  // namespace

std::array<uint32_t, 4> Philox4x32::block(std::array<uint32_t, 4> counter,
                                          std::array<uint32_t, 2> key) {
  for (int r = 0; r < 10; ++r) {
    round_once(counter, key);
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return counter;
}

std::array<uint32_t, 4> CounterRng::raw(NoiseKind kind, uint32_t agent, uint32_t t,
                                        uint32_t component) const {
  const std::array<uint32_t, 2> key = {
      static_cast<uint32_t>(seed_),
      static_cast<uint32_t>(seed_ >> 32) ^ domain_,
  };
  const std::array<uint32_t, 4> counter = {static_cast<uint32_t>(kind), agent, t, component};
  return Philox4x32::block(counter, key);
}

double CounterRng::uniform(NoiseKind kind, uint32_t agent, uint32_t t,
                           uint32_t component) const {
  const auto r = raw(kind, agent, t, component);
  const uint64_t bits = (static_cast<uint64_t>(r[0]) << 32) | r[1];
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

double CounterRng::normal(NoiseKind kind, uint32_t agent, uint32_t t,
                          uint32_t component) const {
  const auto r = raw(kind, agent, t, component);
  const uint64_t a = (static_cast<uint64_t>(r[0]) << 32) | r[1];
  const uint64_t b = (static_cast<uint64_t>(r[2]) << 32) | r[3];
  const double u1 = static_cast<double>(a >> 11) * 0x1.0p-53;  // [0, 1)
  const double u2 = static_cast<double>(b >> 11) * 0x1.0p-53;
  // Box-Muller; 1 - u1 lies in (0, 1] so the log is finite.
  const double radius = std::sqrt(-2.0 * std::log1p(-u1));
  return radius * std::cos(2.0 * M_PI * u2);
}

}  // namespace netlqr
