#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace clover {

// Deterministic RNG wrapper. All distribution math is done here rather than
// through std:: distributions, so identical seeds give identical streams on
// any platform/toolchain.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  uint64_t bits() { return gen_(); }

  // [0, 1)
  double uniform() { return (gen_() >> 11) * 0x1.0p-53; }

  // {0, ..., n-1}, unbiased via rejection
  uint64_t uniform_int(uint64_t n) {
    if (n == 0) return 0;
    const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t x;
    do {
      x = gen_();
    } while (x >= limit);
    return x % n;
  }

  // standard normal, Box-Muller (second value discarded to keep the
  // stream stateless)
  double normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log1p(-u1));
    return r * std::cos(2.0 * M_PI * u2);
  }

  bool bernoulli(double p) { return uniform() < p; }

  // uniform in [lo, hi)
  double uniform_in(double lo, double hi) { return lo + (hi - lo) * uniform(); }

 private:
  std::mt19937_64 gen_;
};

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline uint64_t fnv1a(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Derives independent named sub-streams from one run seed. Changing how one
// stream is consumed never perturbs another.
struct RngPool {
  uint64_t run_seed = 0;
  Rng stream(std::string_view name) const {
    return Rng(splitmix64(run_seed ^ fnv1a(name)));
  }
};

}  // namespace clover
