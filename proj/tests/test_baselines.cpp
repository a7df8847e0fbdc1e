#include <doctest.h>

#include "uavmtd/baselines.hpp"
#include "uavmtd/training.hpp"

using namespace uavmtd;

TEST_CASE("no defense is always the no-op") {
  const Observation o = Observation::Random(17);
  CHECK(no_defense_policy(o) == MtdCommand{});
  ScenarioConfig cfg;
  const auto out = evaluate(cfg, {AttackStrategy::fixed, AttackKind::node}, no_defense(), 1, 3, 2);
  for (const auto& e : out) {
    CHECK(e.metrics.cumulative_cost == 0);
    CHECK(e.metrics.mitigation_rate < 1.0);
  }
}

TEST_CASE("random policy marginals") {
  Rng rng(3);
  const Observation o = Observation::Zero(17);
  const int n = 10000;
  int hops = 0, claims = 0;
  int relay[3] = {0, 0, 0};
  for (int i = 0; i < n; ++i) {
    const auto c = random_policy(o, rng);
    hops += c.hop;
    claims += c.leader_claim;
    relay[c.relay + 1]++;
  }
  const double s2 = 3 * std::sqrt(n * 0.25);
  CHECK(std::abs(hops - n / 2) < s2);
  CHECK(std::abs(claims - n / 2) < s2);
  const double s3 = 3 * std::sqrt(n * (1.0 / 3) * (2.0 / 3));
  for (int k : relay) CHECK(std::abs(k - n / 3.0) < s3);

  Rng a(5), b(5);
  for (int i = 0; i < 100; ++i) CHECK(random_policy(o, a) == random_policy(o, b));
}

TEST_CASE("periodic hop schedule") {
  auto votes = [](int period, int steps) {
    const PeriodicHopPolicy p(period);
    int total = 0;
    for (int t = 0; t < steps; ++t) {
      for (int agent = 0; agent < 5; ++agent) {
        const auto c = p(agent, t);
        total += c.hop;
        if (agent != 0) CHECK(c.hop == 0);
        CHECK(c.leader_claim == 0);
        CHECK(c.relay == 0);
      }
    }
    return total;
  };
  CHECK(votes(5, 50) == 10);
  CHECK(votes(51, 50) == 1);
  CHECK(PeriodicHopPolicy(51)(0, 0).hop == 1);
  CHECK_THROWS_AS(PeriodicHopPolicy(0), std::invalid_argument);
  CHECK_THROWS_AS(PeriodicHopPolicy(-3), std::invalid_argument);
}

TEST_CASE("periodic hopping beats no defense against a fixed attacker") {
  ScenarioConfig cfg;
  for (auto kind : {AttackKind::node, AttackKind::link}) {
    const Scenario sc{AttackStrategy::fixed, kind};
    const auto none = evaluate(cfg, sc, no_defense(), 1, 20, 1);
    const auto periodic = evaluate(cfg, sc, periodic_defense(10), 1, 20, 1);
    for (std::size_t i = 0; i < none.size(); ++i) {
      CHECK(periodic[i].metrics.mitigation_rate >= none[i].metrics.mitigation_rate);
    }
  }
}
