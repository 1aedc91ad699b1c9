#include "cfisac/rng.hpp"

#include <cmath>

namespace cfisac {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t Substream::derive_key(std::uint64_t seed, std::string_view tag,
                                    std::uint64_t i, std::uint64_t j) {
  std::uint64_t k = splitmix64(seed);
  k = splitmix64(k ^ fnv1a64(tag));
  k = splitmix64(k ^ splitmix64(i + 0x632be59bd9b4e019ULL));
  k = splitmix64(k ^ splitmix64(j + 0x85157af5ULL));
  return k;
}

Substream::Substream(std::uint64_t seed, std::string_view tag, std::uint64_t i,
                     std::uint64_t j)
    : engine_(derive_key(seed, tag, i, j)) {}

double Substream::uniform() { return uniform_(engine_); }

double Substream::normal() { return normal_(engine_); }

cx Substream::complex_normal(double variance) {
  const double s = std::sqrt(variance / 2.0);
  const double re = normal_(engine_);
  const double im = normal_(engine_);
  return {s * re, s * im};
}

}  // namespace cfisac
