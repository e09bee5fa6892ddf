#pragma once

#include <cmath>
#include <cstdint>

namespace fairot {

// One splitmix64 output computed from x. Pure function of its argument.
inline std::uint64_t mix_u64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Folds an ordered key (seed, part0, part1, ...) into a stream seed.
// Distinct keys give independent-looking streams; the same key always gives
// the same stream, which is what makes repair independent of batching and
// thread schedule.
template <class... Parts>
inline std::uint64_t derive_seed(std::uint64_t seed, Parts... parts) {
  std::uint64_t h = mix_u64(seed ^ 0x6a09e667f3bcc909ULL);
  ((h = mix_u64(h ^ (static_cast<std::uint64_t>(parts) * 0x9e3779b97f4a7c15ULL + 0xd1b54a32d192ed03ULL))), ...);
  return h;
}

// Uniform double in [0, 1) from the top 53 bits of one mix step.
inline double unit_from_key(std::uint64_t key) {
  return static_cast<double>(mix_u64(key) >> 11) * 0x1.0p-53;
}

// Sequential splitmix64 generator. Small state, passes standard statistical
// batteries, and is bit-reproducible on every platform, unlike the
// std::<...>_distribution adapters.
class Splitmix64 {
 public:
  explicit Splitmix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // [0, 1)
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  bool next_bernoulli(double p) { return next_unit() < p; }

  // Standard normal via Box-Muller; the spare draw is cached.
  double next_normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 1.0 - next_unit();  // (0, 1]: keeps the log finite
    double u2 = next_unit();
    double r = std::sqrt(-2.0 * std::log(u1));
    double angle = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(angle);
    has_spare_ = true;
    return r * std::cos(angle);
  }

  // Uniform index in [0, n)
  std::uint64_t next_below(std::uint64_t n) {
    // Multiply-shift; bias is < 2^-64 * n, negligible for the sizes used here.
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace fairot
