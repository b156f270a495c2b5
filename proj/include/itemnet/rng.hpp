#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace itemnet {

// All randomness in the library flows through this header so that runs are
// reproducible bit-for-bit. std::mt19937_64 output is pinned by the standard;
// the normal transform is hand-rolled below because std::normal_distribution
// is implementation-defined.

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Deterministic per-stage seed: mixes the run seed with a stage tag such as
// "uva" or "boot/openness".
inline std::uint64_t derive_seed(std::uint64_t run_seed, std::string_view tag) {
  return splitmix64(run_seed ^ fnv1a(tag));
}

// Replicate k of a bootstrap uses run_seed ^ k, so any subset of replicates
// can be regenerated independently.
inline std::uint64_t replicate_seed(std::uint64_t seed_base, std::uint64_t k) {
  return seed_base ^ k;
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; the spare value is cached.
  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    return engine_() % n;
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace itemnet
