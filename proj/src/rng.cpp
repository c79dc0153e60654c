#include "nnlab/rng.hpp"

namespace nnlab {

SeededRng SeededRng::derive(std::string_view label) const {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : label) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return derive(h);
}

SeededRng SeededRng::derive(uint64_t label) const { return SeededRng(mix(key_ ^ mix(label ^ 0x3c6ef372fe94f82bULL)), seed_, 0); }

uint64_t SeededRng::below(uint64_t counter, uint64_t n) const {
  // Multiply-shift reduction; bias is below 2^-64 * n.
  return static_cast<uint64_t>((static_cast<unsigned __int128>(bits(counter)) * n) >> 64);
}

}  // namespace nnlab
