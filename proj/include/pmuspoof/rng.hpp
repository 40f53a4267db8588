#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace pmuspoof {

// Deterministic RNG stack used everywhere randomness is needed. Fixed
// algorithms (splitmix64 seeding, xoshiro256++ core, Box-Muller gaussians)
// so that a seed produces the same stream on every platform; std::mt19937
// and libm-backed distributions are deliberately avoided.

struct SplitMix64 {
  uint64_t state = 0;

  uint64_t next() {
    uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
};

// Mixes a master seed with up to two stream tags. Used to give each
// (signal, pmu) pair its own independent substream.
inline uint64_t derive_seed(uint64_t master, uint64_t tag_a, uint64_t tag_b = 0) {
  SplitMix64 sm{master};
  uint64_t h = sm.next();
  sm.state = h ^ (0xD1B54A32D192ED03ULL * (tag_a + 1));
  h = sm.next();
  sm.state = h ^ (0x8CB92BA72F3D8DD7ULL * (tag_b + 1));
  return sm.next();
}

class Xoshiro256pp {
 public:
  explicit Xoshiro256pp(uint64_t seed) {
    SplitMix64 sm{seed};
    for (auto& w : s_) w = sm.next();
  }

  uint64_t next() {
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

  // Uniform in [0,1), 53 random bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform in (0,1]; safe as a log() argument.
  double uniform01_open_low() {
    return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
  }

  // Uniform integer in [0, bound) by rejection; bound must be nonzero.
  uint64_t bounded(uint64_t bound) {
    const uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const uint64_t r = next();
      if (r >= threshold) return r % bound;
    }
  }

 private:
  static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::array<uint64_t, 4> s_;
};

// Standard normal sampler, Box-Muller with the spare value cached.
class GaussianRng {
 public:
  explicit GaussianRng(uint64_t seed) : rng_(seed) {}

  double next() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = rng_.uniform01_open_low();
    const double u2 = rng_.uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  Xoshiro256pp& raw() { return rng_; }

 private:
  Xoshiro256pp rng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace pmuspoof
