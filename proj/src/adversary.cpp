#include "uavmtd/adversary.hpp"

namespace uavmtd {

std::string_view to_string(AttackKind k) { return k == AttackKind::node ? "node" : "link"; }

std::string_view to_string(AttackStrategy s) {
  switch (s) {
    case AttackStrategy::fixed: return "fixed";
    case AttackStrategy::random: return "random";
    case AttackStrategy::greedy: return "greedy";
  }
  return "fixed";
}

std::optional<AttackKind> parse_attack_kind(std::string_view text) {
  if (text == "node") return AttackKind::node;
  if (text == "link") return AttackKind::link;
  return std::nullopt;
}

std::optional<AttackStrategy> parse_attack_strategy(std::string_view text) {
  if (text == "fixed") return AttackStrategy::fixed;
  if (text == "random") return AttackStrategy::random;
  if (text == "greedy") return AttackStrategy::greedy;
  return std::nullopt;
}

namespace {

// Clock comparisons tolerate accumulated rounding from repeated dt additions.
constexpr double kClockEps = 1e-9;

void select_target(AttackState& atk, const AttackView& view, Rng& rng) {
  const CommGraph& g = view.graph;
  if (atk.strategy == AttackStrategy::greedy) {
    atk.has_target = true;
    if (atk.kind == AttackKind::node) {
      atk.target_node = view.leader;
    } else {
      atk.target_link = Link(kGcsNode, view.leader);
    }
    atk.f_atk = view.network_channel;
    return;
  }

  if (atk.kind == AttackKind::node) {
    const int n_uavs = g.node_count() - 1;
    atk.target_node = 1 + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(n_uavs)));
    atk.f_atk = g.channels[static_cast<std::size_t>(atk.target_node)];
    atk.has_target = true;
    return;
  }

  // Link targets are drawn from the links that currently carry traffic.
  std::vector<Link> candidates;
  for (int i = 0; i < g.node_count(); ++i) {
    for (int j = i + 1; j < g.node_count(); ++j) {
      if (g.has_radio_edge(i, j)) candidates.emplace_back(i, j);
    }
  }
  if (candidates.empty()) {
    atk.has_target = false;
    return;
  }
  atk.target_link = candidates[rng.uniform_index(candidates.size())];
  atk.f_atk = g.channels[static_cast<std::size_t>(atk.target_link.a)];
  atk.has_target = true;
}

}  // namespace

AttackState init_attack(AttackStrategy strategy, AttackKind kind, AttackTiming timing,
                        const AttackView& view, Rng& rng) {
  AttackState atk;
  atk.kind = kind;
  atk.strategy = strategy;
  atk.timing = timing;
  select_target(atk, view, rng);
  return atk;
}

bool node_effective(const AttackState& atk, int node, std::span<const int> channels) {
  if (atk.kind != AttackKind::node || !atk.has_target || atk.target_node != node) return false;
  return channels[static_cast<std::size_t>(node)] == atk.f_atk && atk.active();
}

bool link_effective(const AttackState& atk, Link link, const CommGraph& graph) {
  if (atk.kind != AttackKind::link || !atk.has_target || !(atk.target_link == link)) return false;
  if (!graph.has_radio_edge(link.a, link.b)) return false;
  const auto fa = graph.channels[static_cast<std::size_t>(link.a)];
  const auto fb = graph.channels[static_cast<std::size_t>(link.b)];
  return fa == atk.f_atk && fb == atk.f_atk && atk.active();
}

AttackState tick_attack(AttackState atk, const AttackView& view, double dt, Rng& rng) {
  atk.round_clock += dt;
  if (atk.round_clock >= atk.timing.tau_eff() - kClockEps) {
    atk.round_clock -= atk.timing.tau_eff();
    if (atk.round_clock < kClockEps) atk.round_clock = 0.0;
    atk.round_index += 1;
    if (atk.strategy != AttackStrategy::fixed) select_target(atk, view, rng);
  }
  return atk;
}

}  // namespace uavmtd
