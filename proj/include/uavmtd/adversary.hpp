#pragma once

#include <optional>
#include <string_view>

#include "uavmtd/network.hpp"
#include "uavmtd/rng.hpp"

namespace uavmtd {

enum class AttackKind { node, link };
enum class AttackStrategy { fixed, random, greedy };

std::string_view to_string(AttackKind k);
std::string_view to_string(AttackStrategy s);
std::optional<AttackKind> parse_attack_kind(std::string_view text);
std::optional<AttackStrategy> parse_attack_strategy(std::string_view text);

struct AttackTiming {
  double tau_atk = 15.0;
  double tau_recon = 5.0;

  double tau_eff() const { return tau_atk + tau_recon; }
};

/// One DoS attacker. A round lasts tau_eff: active for the first tau_atk
/// seconds, then reconnaissance. The target only changes at a round wrap.
struct AttackState {
  AttackKind kind = AttackKind::node;
  AttackStrategy strategy = AttackStrategy::fixed;
  AttackTiming timing{};
  int target_node = -1;   // node kind
  Link target_link{};     // link kind
  bool has_target = false;
  int f_atk = 0;
  double round_clock = 0.0;
  int round_index = 1;

  bool active() const { return round_clock < timing.tau_atk - 1e-9; }
};

/// What the attacker can see when it (re)selects a target.
struct AttackView {
  const CommGraph& graph;
  int leader;
  int network_channel;
};

AttackState init_attack(AttackStrategy strategy, AttackKind kind, AttackTiming timing,
                        const AttackView& view, Rng& rng);

/// E^N for `node`: targeted, channel-aligned and inside the active window.
bool node_effective(const AttackState& atk, int node, std::span<const int> channels);

/// E^L for `link`: targeted, a radio edge, all three channels aligned, and
/// inside the active window.
bool link_effective(const AttackState& atk, Link link, const CommGraph& graph);

/// Advances the round clock; at the tau_eff boundary the clock wraps, the
/// round counter increments and random/greedy attackers re-target.
AttackState tick_attack(AttackState atk, const AttackView& view, double dt, Rng& rng);

}  // namespace uavmtd
