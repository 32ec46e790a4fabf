// core/include/revoice/base/rng.h
#ifndef REVOICE_BASE_RNG_H_
#define REVOICE_BASE_RNG_H_

#include <cmath>
#include <cstdint>
#include <random>

namespace revoice {

// Seeded random stream with hand-rolled distributions so that draws are
// reproducible across standard library implementations.
class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(seed) {}

  uint64_t raw() { return eng_(); }

  // Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, n).
  uint64_t uniform_int(uint64_t n) {
    return n == 0 ? 0 : eng_() % n;
  }

  // Standard normal via Box-Muller (cosine branch only, no cached state).
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  // Derive an independent child seed, e.g. one per corpus item.
  uint64_t fork(uint64_t salt) {
    uint64_t x = eng_() ^ (salt * 0x9e3779b97f4a7c15ULL);
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    return x;
  }

 private:
  std::mt19937_64 eng_;
};

// Stateless mix of (seed, salt) for per-item determinism in fan-out loops.
inline uint64_t mix_seed(uint64_t seed, uint64_t salt) {
  uint64_t x = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

}  // namespace revoice

#endif  // REVOICE_BASE_RNG_H_
