#pragma once

#include <cmath>
#include <cstdint>

namespace nse {

// Seeded RNG with fully specified arithmetic so that identical seeds give
// bit-identical streams on every platform and under any thread schedule.
// Derived streams (per epoch, per channel) are keyed with mix64 so parallel
// generation does not depend on worker order.

inline uint64_t splitmix64(uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Stateless key derivation: mix64(seed, stream, counter) -> sub-seed.
inline uint64_t mix64(uint64_t a, uint64_t b = 0, uint64_t c = 0) {
  uint64_t s = a;
  uint64_t h = splitmix64(s);
  s ^= b * 0x9e3779b97f4a7c15ULL + 0x7f4a7c15ULL;
  h ^= splitmix64(s);
  s ^= c * 0xbf58476d1ce4e5b9ULL + 0x1ce4e5b9ULL;
  h ^= splitmix64(s);
  return h;
}

class Rng {
 public:
  explicit Rng(uint64_t seed) {
    uint64_t sm = seed;
    for (auto& w : s_) w = splitmix64(sm);
    have_spare_ = false;
    spare_ = 0.0;
  }

  // xoshiro256++
  uint64_t next_u64() {
    auto rotl = [](uint64_t x, int k) { return (x << k) | (x >> (64 - k)); };
    const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in (0, 1].
  double uniform_pos() { return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53; }

  // Standard normal via Box-Muller (no rejection, deterministic call count).
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform_pos();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  // Uniform integer in [0, n).
  uint64_t below(uint64_t n) { return n ? next_u64() % n : 0; }

 private:
  uint64_t s_[4];
  bool have_spare_;
  double spare_;
};

}  // namespace nse
