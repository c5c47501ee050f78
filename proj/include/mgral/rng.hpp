#ifndef MGRAL_RNG_HPP
#define MGRAL_RNG_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace mgral {

inline std::uint64_t splitmix64_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) {
  return splitmix64_mix(a + 0x9E3779B97F4A7C15ULL * (b + 1));
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a) {
  return hash_combine(master, a);
}
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                                 std::uint64_t b) {
  return hash_combine(hash_combine(master, a), b);
}
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view tag) {
  return hash_combine(master, fnv1a(tag));
}
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view tag,
                                 std::uint64_t b) {
  return hash_combine(hash_combine(master, fnv1a(tag)), b);
}

// Counter-based generator (splitmix64 over a strided counter). The stream
// position is part of the value state, so checkpoints capture it exactly
// and restored streams continue bit-identically.
class Rng {
 public:
  Rng() = default;
  explicit Rng(std::uint64_t seed, std::uint64_t pos = 0)
      : seed_(seed), pos_(pos) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t pos() const { return pos_; }

  std::uint64_t next_u64() {
    return splitmix64_mix(seed_ + 0x9E3779B97F4A7C15ULL * ++pos_);
  }

  // Uniform in [0, 1), 53-bit resolution. One u64 per call.
  double uniform01() { return double(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in [-1, 1).
  double uniform_sym() { return 2.0 * uniform01() - 1.0; }

  // Uniform integer in [0, n). Exactly one u64 per call; the floor bias is
  // below 2^-40 for any n this project uses.
  int uniform_int(int n) {
    int k = static_cast<int>(uniform01() * n);
    return k >= n ? n - 1 : k;
  }

  // Standard normal via Box-Muller. Exactly two u64 per call, no cached
  // spare, so position arithmetic stays predictable.
  double normal() {
    double u1 = uniform01();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::uint64_t seed_ = 0;
  std::uint64_t pos_ = 0;
};

}  // namespace mgral

#endif  // MGRAL_RNG_HPP
