#include "uavmtd/mtd.hpp"

#include <limits>

namespace uavmtd {

MtdState initial_mtd_state(int n_uavs, int channel) {
  MtdState s;
  s.defense.leader = 1;
  s.defense.relay_flags.assign(static_cast<std::size_t>(n_uavs + 1), false);
  s.defense.channel = channel;
  return s;
}

AppliedEffects apply_due_effects(MtdState& state, int step, int n_channels, Rng& rng) {
  auto& d = state.defense;
  auto& p = state.pending;
  AppliedEffects applied;
  applied.old_channel = d.channel;

  if (p.leader && p.leader->step <= step) {
    if (p.leader->value != d.leader) {
      d.leader = p.leader->value;
      d.routes.clear();
      p.routes.clear();
      applied.leader_switched = true;
    }
    p.leader.reset();
  }

  for (auto it = p.flags.begin(); it != p.flags.end();) {
    if (it->second.step > step) {
      ++it;
      continue;
    }
    const int node = it->first;
    d.relay_flags[static_cast<std::size_t>(node)] = it->second.value != 0;
    if (it->second.value == 0) {
      std::erase_if(d.routes, [node](const auto& kv) { return kv.second == node; });
      std::erase_if(p.routes, [node](const auto& kv) { return kv.second.value == node; });
    }
    it = p.flags.erase(it);
  }

  for (auto it = p.routes.begin(); it != p.routes.end();) {
    if (it->second.step > step) {
      ++it;
      continue;
    }
    d.routes[it->first] = it->second.value;
    it = p.routes.erase(it);
  }

  if (p.hop_step && *p.hop_step <= step) {
    const auto pick = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(n_channels - 1)));
    d.channel = pick >= d.channel ? pick + 1 : pick;
    p.hop_step.reset();
    applied.hopped = true;
  }
  return applied;
}

void resolve_leader_switch(std::span<const int> claims, std::span<const double> scores,
                           MtdState& state, int step, int delay) {
  int best = -1;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t u = 0; u < claims.size(); ++u) {
    const int node = node_of(static_cast<int>(u));
    if (!claims[u] || node == state.defense.leader) continue;
    if (scores[u] > best_score) {
      best = node;
      best_score = scores[u];
    }
  }
  if (best < 0) return;
  state.pending.leader = PendingEffects::Due{best, step + delay};
}

void resolve_route_mutation(std::span<const int> relay_actions, MtdState& state,
                            const CommGraph& graph, const AttackState& attack,
                            const std::vector<bool>& node_attacked,
                            std::span<const Vec3<double>> positions, int step, int delay) {
  auto& d = state.defense;
  auto& p = state.pending;

  for (std::size_t u = 0; u < relay_actions.size(); ++u) {
    const int node = node_of(static_cast<int>(u));
    if (relay_actions[u] > 0) p.flags[node] = {1, step + delay};
    if (relay_actions[u] < 0) p.flags[node] = {0, step + delay};
  }

  const int leader = d.leader;
  const int n_nodes = graph.node_count();
  for (int node = 1; node < n_nodes; ++node) {
    const int up = upstream_of(node, leader);
    const bool jammed = link_effective(attack, Link(up, node), graph);
    if (!jammed) {
      d.routes.erase(node);
      p.routes.erase(node);
      continue;
    }
    if (d.routes.contains(node) || p.routes.contains(node)) continue;

    int best = -1;
    double best_len = std::numeric_limits<double>::infinity();
    for (int r = 1; r < n_nodes; ++r) {
      if (!d.relay_flags[static_cast<std::size_t>(r)]) continue;
      if (!relay_eligible(graph, leader, node, r, node_attacked)) continue;
      const double len = (positions[static_cast<std::size_t>(up)] - positions[static_cast<std::size_t>(r)]).norm() +
                         (positions[static_cast<std::size_t>(r)] - positions[static_cast<std::size_t>(node)]).norm();
      if (len < best_len) {
        best = r;
        best_len = len;
      }
    }
    if (best >= 0) p.routes[node] = {best, step + delay};
  }
}

void resolve_frequency_hop(std::span<const int> votes, MtdState& state, int step, int delay) {
  for (int v : votes) {
    if (v) {
      state.pending.hop_step = step + delay;
      return;
    }
  }
}

}  // namespace uavmtd
