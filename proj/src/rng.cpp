#include "uavmtd/rng.hpp"

#include <limits>

namespace uavmtd {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

}  // namespace

Rng::Rng(std::uint64_t seed) : Rng(FromKey{}, splitmix64(seed)) {}

Rng::Rng(FromKey, std::uint64_t key) : key_(key), engine_(splitmix64(key ^ 0x5851F42D4C957F2DULL)) {}

Rng Rng::split(std::string_view label) const {
  return Rng(FromKey{}, splitmix64(key_ ^ splitmix64(fnv1a(label))));
}

Rng Rng::split(std::string_view label, std::uint64_t index) const {
  const Rng child = split(label);
  return Rng(FromKey{}, splitmix64(child.key_ ^ splitmix64(index + 1)));
}

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::uniform_index(std::uint64_t n) {
  // Rejection sampling keeps the draw exactly uniform.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x = engine_();
  while (x >= limit) x = engine_();
  return x % n;
}

}  // namespace uavmtd
