#include <doctest.h>

#include <set>

#include "uavmtd/mtd.hpp"

using namespace uavmtd;

namespace {

std::vector<Vec3<double>> reference_nodes() {
  const auto spec = FormationSpec<double>::from_config(ScenarioConfig{});
  std::vector<Vec3<double>> p{Vec3<double>(500, 500, 0)};
  for (int i = 0; i < 5; ++i) p.push_back(initial_kinematics(spec, i, 5).position);
  return p;
}

AttackState link_attack(Link l, int f) {
  AttackState a;
  a.kind = AttackKind::link;
  a.target_link = l;
  a.has_target = true;
  a.f_atk = f;
  return a;
}

}  // namespace

TEST_CASE("action cost over all twelve commands") {
  for (int l = 0; l <= 1; ++l) {
    for (int r = -1; r <= 1; ++r) {
      for (int f = 0; f <= 1; ++f) {
        const int expect = (l ? 1 : 0) + (r ? 1 : 0) + (f ? 1 : 0);
        CHECK(action_cost({l, r, f}) == expect);
      }
    }
  }
  CHECK(action_cost({0, 0, 0}) == 0);
  CHECK(action_cost({1, 0, 1}) == 2);
  CHECK(action_cost({0, -1, 0}) == 1);
}

TEST_CASE("leader switch examples") {
  Rng rng(1);
  auto s = initial_mtd_state(5, 0);
  const std::vector<double> scores(5, 1.0);

  resolve_leader_switch(std::vector<int>(5, 0), scores, s, 0, 1);
  CHECK_FALSE(s.pending.leader.has_value());

  resolve_leader_switch(std::vector<int>{0, 0, 1, 0, 0}, scores, s, 4, 1);
  apply_due_effects(s, 4, 5, rng);
  CHECK(s.defense.leader == 1);
  const auto applied = apply_due_effects(s, 5, 5, rng);
  CHECK(applied.leader_switched);
  CHECK(s.defense.leader == 3);

  auto t = initial_mtd_state(5, 0);
  resolve_leader_switch(std::vector<int>{0, 1, 0, 1, 0}, scores, t, 0, 1);
  apply_due_effects(t, 1, 5, rng);
  CHECK(t.defense.leader == 2);

  auto sitting = initial_mtd_state(5, 0);
  resolve_leader_switch(std::vector<int>{1, 0, 0, 0, 0}, scores, sitting, 0, 1);
  CHECK_FALSE(sitting.pending.leader.has_value());
}

TEST_CASE("leader election matches brute force over every claim set") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> scores(5);
    for (auto& x : scores) x = static_cast<double>(rng.uniform_index(3)) / 2.0;
    for (int leader = 1; leader <= 5; ++leader) {
      for (int mask = 0; mask < 32; ++mask) {
        std::vector<int> claims(5);
        for (int u = 0; u < 5; ++u) claims[u] = (mask >> u) & 1;

        int expect = leader;
        double best = -1.0;
        for (int u = 0; u < 5; ++u) {
          if (claims[u] && u + 1 != leader && scores[u] > best) {
            best = scores[u];
            expect = u + 1;
          }
        }
        auto s = initial_mtd_state(5, 0);
        s.defense.leader = leader;
        resolve_leader_switch(claims, scores, s, 0, 1);
        apply_due_effects(s, 1, 5, rng);
        CHECK(s.defense.leader == expect);
        CHECK(s.defense.leader >= 1);
      }
    }
  }
}

TEST_CASE("frequency hop") {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    auto s = initial_mtd_state(5, 2);
    resolve_frequency_hop(std::vector<int>{0, 0, 1, 0, 0}, s, 0, 1);
    apply_due_effects(s, 0, 5, rng);
    CHECK(s.defense.channel == 2);
    const auto applied = apply_due_effects(s, 1, 5, rng);
    CHECK(applied.hopped);
    CHECK(s.defense.channel != 2);
    CHECK(s.defense.channel >= 0);
    CHECK(s.defense.channel < 5);
  }
  auto quiet = initial_mtd_state(5, 2);
  resolve_frequency_hop(std::vector<int>(5, 0), quiet, 0, 1);
  CHECK_FALSE(apply_due_effects(quiet, 1, 5, rng).hopped);
  CHECK(quiet.defense.channel == 2);

  auto binary = initial_mtd_state(5, 0);
  resolve_frequency_hop(std::vector<int>{1, 1, 1, 1, 1}, binary, 0, 1);
  apply_due_effects(binary, 1, 2, rng);
  CHECK(binary.defense.channel == 1);
}

TEST_CASE("hop draws are uniform over the other channels") {
  Rng rng(8);
  std::map<int, int> seen;
  for (int i = 0; i < 8000; ++i) {
    auto s = initial_mtd_state(5, 2);
    s.pending.hop_step = 0;
    apply_due_effects(s, 0, 5, rng);
    seen[s.defense.channel]++;
  }
  CHECK(seen.size() == 4);
  for (const auto& [ch, n] : seen) CHECK(std::abs(n - 2000) < 200);
}

TEST_CASE("route mutation installs, keeps and restores detours") {
  Rng rng(1);
  const auto p = reference_nodes();
  const std::vector<int> ch(6, 0);
  const auto atk = link_attack(Link(1, 2), 0);
  const std::vector<Link> jam{Link(1, 2)};
  const auto g = build_graph(p, ch, 500.0, jam);
  const std::vector<bool> clean(6, false);

  auto s = initial_mtd_state(5, 0);
  resolve_route_mutation(std::vector<int>{0, 0, 1, 0, 0}, s, g, atk, clean, p, 0, 1);
  CHECK(s.defense.routes.empty());
  apply_due_effects(s, 1, 5, rng);
  CHECK(s.defense.relay_flags[3]);

  resolve_route_mutation(std::vector<int>(5, 0), s, g, atk, clean, p, 1, 1);
  apply_due_effects(s, 2, 5, rng);
  REQUIRE(s.defense.routes.contains(2));
  CHECK(s.defense.routes.at(2) == 3);
  const auto with_route = build_graph(p, ch, 500.0, jam, s.defense.routes);
  CHECK(connectivity_indicator(with_route, 1, 2, clean));

  auto ended = atk;
  ended.round_clock = 16.0;
  const auto free = build_graph(p, ch, 500.0);
  resolve_route_mutation(std::vector<int>(5, 0), s, free, ended, clean, p, 16, 1);
  CHECK(s.defense.routes.empty());
}

TEST_CASE("no eligible relay, no route") {
  Rng rng(1);
  const auto p = reference_nodes();
  const auto atk = link_attack(Link(1, 2), 0);
  const auto g = build_graph(p, std::vector<int>(6, 0), 500.0, std::vector<Link>{Link(1, 2)});
  auto s = initial_mtd_state(5, 0);
  s.defense.relay_flags[4] = true;
  resolve_route_mutation(std::vector<int>(5, 0), s, g, atk, std::vector<bool>(6, false), p, 0, 1);
  apply_due_effects(s, 1, 5, rng);
  CHECK(s.defense.routes.empty());
  CHECK_FALSE(connectivity_indicator(g, 1, 2, std::vector<bool>(6, false)));
}

TEST_CASE("clearing a flag tears down routes through that relay") {
  Rng rng(1);
  auto s = initial_mtd_state(5, 0);
  s.defense.relay_flags[3] = true;
  s.defense.routes[2] = 3;
  s.pending.flags[3] = {0, 1};
  apply_due_effects(s, 1, 5, rng);
  CHECK_FALSE(s.defense.relay_flags[3]);
  CHECK(s.defense.routes.empty());
}

TEST_CASE("leader change clears routes") {
  Rng rng(1);
  auto s = initial_mtd_state(5, 0);
  s.defense.routes[2] = 3;
  s.pending.leader = PendingEffects::Due{4, 1};
  apply_due_effects(s, 1, 5, rng);
  CHECK(s.defense.leader == 4);
  CHECK(s.defense.routes.empty());
}

TEST_CASE("re-issuing a pending hop moves its due step") {
  auto s = initial_mtd_state(5, 0);
  resolve_frequency_hop(std::vector<int>{1, 0, 0, 0, 0}, s, 3, 1);
  resolve_frequency_hop(std::vector<int>{1, 0, 0, 0, 0}, s, 4, 1);
  CHECK(s.pending.hop_step == 5);
}
