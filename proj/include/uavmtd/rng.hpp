#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace uavmtd {

/// Splittable random stream. A stream is identified by a 64-bit key; child
/// streams derive their key from (parent key, label) and never touch the
/// parent's engine state. All draws are defined bit-exactly on top of
/// std::mt19937_64, so sequences do not depend on the standard library's
/// distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  Rng split(std::string_view label) const;
  Rng split(std::string_view label, std::uint64_t index) const;

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform();

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t uniform_index(std::uint64_t n);

  std::uint64_t key() const { return key_; }

 private:
  struct FromKey {};
  Rng(FromKey, std::uint64_t key);

  std::uint64_t key_;
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace uavmtd
