#include <doctest.h>

#include <set>

#include "uavmtd/rng.hpp"

using namespace uavmtd;

TEST_CASE("same seed and label reproduce") {
  Rng a = Rng(1).split("env");
  Rng b = Rng(1).split("env");
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("labels and seeds separate streams") {
  for (std::uint64_t s = 1; s <= 100; ++s) {
    CHECK(Rng(s).split("env").next_u64() != Rng(s).split("attacker").next_u64());
    CHECK(Rng(s).split("env").next_u64() != Rng(s + 1).split("env").next_u64());
  }
}

TEST_CASE("splitting never perturbs the parent") {
  Rng a(42);
  Rng b(42);
  Rng child = a.split("x");
  for (int i = 0; i < 10; ++i) child.next_u64();
  CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("indexed splits are distinct") {
  const Rng root(9);
  std::set<std::uint64_t> firsts;
  for (std::uint64_t i = 0; i < 200; ++i) firsts.insert(root.split("episode", i).next_u64());
  CHECK(firsts.size() == 200);
  CHECK(root.split("episode", 3).key() == root.split("episode", 3).key());
}

TEST_CASE("uniform draws stay in range") {
  Rng r(5);
  double sum = 0.0;
  for (int i = 0; i < 20000; ++i) {
    const double u = r.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(sum / 20000 == doctest::Approx(0.5).epsilon(0.02));
  int counts[3] = {0, 0, 0};
  for (int i = 0; i < 30000; ++i) counts[r.uniform_index(3)]++;
  for (int c : counts) CHECK(std::abs(c - 10000) < 400);
}
