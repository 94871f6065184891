#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>
#include <vector>

namespace fsts {

// splitmix64 finalizer. Good avalanche, trivially portable.
inline uint64_t mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Fans a master seed out to labeled sub-streams: hash_seed(seed, "pairs",
// dataset_index) and hash_seed(seed, "task", k, index) give independent,
// platform-stable streams.
inline uint64_t hash_seed(uint64_t seed, std::string_view label) {
  uint64_t h = seed ^ 0xcbf29ce484222325ULL;
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return mix64(h);
}

inline uint64_t hash_seed(uint64_t seed, std::string_view label, uint64_t a) {
  return mix64(hash_seed(seed, label) ^ mix64(a));
}

inline uint64_t hash_seed(uint64_t seed, std::string_view label, uint64_t a, uint64_t b) {
  return mix64(hash_seed(seed, label, a) ^ mix64(b + 0x632be59bd9b4e019ULL));
}

// Deterministic, platform-independent generator. The standard <random>
// distributions are implementation-defined, which would break the
// byte-identical-outputs contract, so sampling is done by hand here.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed ^ 0x6a09e667f3bcc908ULL) {}

  uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
  }

  // Uniform in [0, 1), 53-bit resolution.
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n). Rejection sampling keeps it unbiased.
  uint64_t below(uint64_t n) {
    if (n <= 1) return 0;
    const uint64_t limit = ~uint64_t{0} - ~uint64_t{0} % n;
    uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % n;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

  // Standard normal via Box-Muller. Only used by tests and synthetic data.
  double next_gaussian() {
    double u1;
    do {
      u1 = next_unit();
    } while (u1 <= 0.0);
    const double u2 = next_unit();
    const double two_pi = 6.283185307179586;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
  }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  uint64_t state_;
};

// Schedule-independent coin flip used by dropout: every element's mask
// depends only on (salt, element index), never on thread layout.
inline bool hash_coin_below(uint64_t salt, uint64_t index, double p) {
  const double u = static_cast<double>(mix64(salt ^ mix64(index + 1)) >> 11) * 0x1.0p-53;
  return u < p;
}

}  // namespace fsts
