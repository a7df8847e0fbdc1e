#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "uavmtd/adversary.hpp"
#include "uavmtd/config.hpp"
#include "uavmtd/mtd.hpp"
#include "uavmtd/network.hpp"
#include "uavmtd/rng.hpp"
#include "uavmtd/swarm_dynamics.hpp"

namespace uavmtd {

using Observation = Eigen::VectorXd;

struct Scenario {
  AttackStrategy strategy = AttackStrategy::fixed;
  AttackKind kind = AttackKind::node;

  bool operator==(const Scenario&) const = default;
};

/// Global environment state.
struct SwarmState {
  int t = 0;
  std::vector<UavKinematics<double>> uavs;
  MtdState mtd;
  AttackState attack;
  CommGraph graph;
  std::vector<bool> node_attacked;  // by node
  std::vector<int> link_jammed;     // by UAV: its upstream link is effectively jammed
  std::vector<int> e;               // by UAV: last evaluated command-path bit
  HeartbeatTracker heartbeat;
};

/// Everything the per-agent reward reads.
struct RewardInputs {
  int connected = 0;
  double deviation = 0.0;
  int cost = 0;
  int node_attacked = 0;
  int upstream_jammed = 0;
  double speed = 0.0;
};

double compute_reward(const RewardInputs& in, const ScenarioConfig& config);

/// Per-step record; every per-UAV vector is indexed by UAV.
struct StepRecord {
  int t = 0;
  int leader = 1;
  int channel = 0;
  bool attack_active = false;
  bool hopped = false;
  bool leader_switched = false;
  int routes_active = 0;
  int separation_violations = 0;
  std::vector<int> e;
  std::vector<int> heartbeat_connected;
  std::vector<int> node_effective;
  std::vector<int> link_effective;
  std::vector<int> cost;
  std::vector<double> speed;
  std::vector<double> deviation;
  std::vector<double> reward;
  std::vector<MtdCommand> actions;
};

struct EpisodeTrace {
  double dt = 1.0;
  int n_uavs = 0;
  Vec3<double> gcs = Vec3<double>::Zero();
  std::vector<StepRecord> steps;
  std::vector<Vec3<double>> final_positions;
};

struct StepResult {
  std::vector<Observation> observations;
  std::vector<double> rewards;
  bool done = false;
};

/// The multi-agent partially observable environment. Each agent controls
/// one UAV and sees only its own observation vector.
class SwarmEnv {
 public:
  SwarmEnv(ScenarioConfig config, Scenario scenario);

  std::vector<Observation> reset(std::uint64_t seed);
  /// Draws the environment and attacker streams from `episode_rng`.
  std::vector<Observation> reset(const Rng& episode_rng);

  /// Advances one step. Stepping a finished episode throws std::logic_error.
  StepResult step(std::span<const MtdCommand> actions);

  std::vector<Observation> observations() const;
  Observation observation(int uav) const;

  const SwarmState& state() const { return state_; }
  const EpisodeTrace& trace() const { return trace_; }
  const ScenarioConfig& config() const { return config_; }
  const Scenario& scenario() const { return scenario_; }
  const FormationSpec<double>& formation() const { return formation_; }
  bool done() const { return state_.t >= config_.steps_per_episode; }
  int observation_dim() const { return config_.observation_dim(); }

  /// Node positions with the GCS at index 0.
  std::vector<Vec3<double>> node_positions() const;

  /// Test hook: replaces the live attacker (e.g. to pin a target).
  void set_attack(const AttackState& attack);
  /// Test hook: direct access to the applied defense configuration.
  MtdState& mtd_state() { return state_.mtd; }

 private:
  void evaluate_connectivity(std::span<const int> relay_actions, bool maintain_routes);
  CommGraph radio_graph() const;

  ScenarioConfig config_;
  Scenario scenario_;
  FormationSpec<double> formation_;
  MtdDelays delays_;
  Rng env_rng_{0};
  Rng attack_rng_{0};
  SwarmState state_;
  EpisodeTrace trace_;
};

}  // namespace uavmtd
