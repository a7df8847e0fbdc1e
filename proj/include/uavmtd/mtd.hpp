#pragma once

#include <map>
#include <optional>
#include <span>
#include <vector>

#include "uavmtd/adversary.hpp"
#include "uavmtd/network.hpp"
#include "uavmtd/rng.hpp"

namespace uavmtd {

/// One agent's MTD decision: leader claim bit, relay trit, hop vote.
/// The all-zero command is a no-op.
struct MtdCommand {
  int leader_claim = 0;  // {0, 1}
  int relay = 0;         // {-1, 0, +1}
  int hop = 0;           // {0, 1}

  bool operator==(const MtdCommand&) const = default;
};

/// Number of nonzero sub-actions issued.
inline int action_cost(const MtdCommand& cmd) {
  return (cmd.leader_claim != 0) + (cmd.relay != 0) + (cmd.hop != 0);
}

/// Applied defense configuration. The leader is always a UAV node, and the
/// whole network shares `channel`.
struct DefenseState {
  int leader = 1;
  std::vector<bool> relay_flags;  // by node; index 0 unused
  std::map<int, int> routes;      // node -> relay
  int channel = 0;
};

/// Commands that have been issued but not yet executed. At most one entry
/// per mechanism and node; re-issuing replaces the due step.
struct PendingEffects {
  struct Due {
    int value;
    int step;
  };
  std::optional<Due> leader;
  std::map<int, Due> flags;   // node -> {0|1, step}
  std::map<int, Due> routes;  // node -> {relay, step}
  std::optional<int> hop_step;
};

/// Execution delays in whole steps.
struct MtdDelays {
  int leader = 1;
  int route = 1;
  int freq = 1;
};

struct MtdState {
  DefenseState defense;
  PendingEffects pending;
};

MtdState initial_mtd_state(int n_uavs, int channel);

/// What changed when due effects were applied.
struct AppliedEffects {
  bool leader_switched = false;
  bool hopped = false;
  int old_channel = 0;
};

/// Executes every pending effect whose due step is <= `step`. A hop draws
/// the new channel uniformly from the channels other than the current one.
AppliedEffects apply_due_effects(MtdState& state, int step, int n_channels, Rng& rng);

/// Schedules a leader change when any non-leader UAV claims: the claimant
/// with the highest heartbeat score wins, ties to the lowest node.
/// `claims` and `scores` are indexed by UAV.
void resolve_leader_switch(std::span<const int> claims, std::span<const double> scores,
                           MtdState& state, int step, int delay);

/// Schedules relay flag changes (+1 set, -1 clear) and maintains detours:
/// routes whose upstream link is no longer jammed are restored to the direct
/// link; every node whose upstream link is jammed and has no route gets the
/// eligible flagged relay with the shortest two-leg distance (ties to the
/// lowest node), installed after `delay` steps.
void resolve_route_mutation(std::span<const int> relay_actions, MtdState& state,
                            const CommGraph& graph, const AttackState& attack,
                            const std::vector<bool>& node_attacked,
                            std::span<const Vec3<double>> positions, int step, int delay);

/// Schedules a network-wide hop when any agent votes.
void resolve_frequency_hop(std::span<const int> votes, MtdState& state, int step, int delay);

}  // namespace uavmtd
