#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace nnlab {

// Counter-based stream: a draw depends only on (seed, labels, counter), so
// results do not depend on iteration order or thread count.
class SeededRng {
 public:
  explicit SeededRng(uint64_t seed = 0) : key_(mix(seed ^ 0x6a09e667f3bcc909ULL)), seed_(seed) {}

  uint64_t seed() const { return seed_; }
  uint64_t key() const { return key_; }

  SeededRng derive(std::string_view label) const;
  SeededRng derive(uint64_t label) const;

  uint64_t bits(uint64_t counter) const { return mix(key_ ^ mix(counter + 0x9e3779b97f4a7c15ULL)); }
  uint64_t bits(uint64_t a, uint64_t b) const { return bits(mix(a) ^ (b * 0xbf58476d1ce4e5b9ULL)); }
  // Uniform on the open interval (0,1).
  double uniform(uint64_t counter) const { return ((bits(counter) >> 11) + 0.5) * 0x1.0p-53; }
  uint64_t below(uint64_t counter, uint64_t n) const;  // uniform on {0, ..., n-1}

  std::mt19937_64 engine() const { return std::mt19937_64(key_); }

  static uint64_t mix(uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  SeededRng(uint64_t key, uint64_t seed, int) : key_(key), seed_(seed) {}
  uint64_t key_;
  uint64_t seed_;
};

}  // namespace nnlab
