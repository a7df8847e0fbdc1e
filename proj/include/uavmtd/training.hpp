#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "uavmtd/config.hpp"
#include "uavmtd/env.hpp"
#include "uavmtd/metrics.hpp"
#include "uavmtd/policy_net.hpp"

namespace uavmtd {

/// Chooses one UAV's command from its own observation.
using PolicyFn = std::function<MtdCommand(int agent, int t, const Observation& obs, Rng& rng)>;

struct EpisodeLog {
  int episode = 0;
  double mean_return = 0.0;  // mean over agents of the undiscounted totals
  EpisodeMetrics metrics;
  int agg_round = 0;  // aggregation rounds completed after this episode
  double wall_ms = 0.0;
};

struct RoundLog {
  int round = 0;
  int episode = 0;  // last episode before the round
  std::vector<double> recent_returns;
  std::vector<double> weights;
  int finetune_steps = 0;
};

struct TrainingHooks {
  std::function<void(const EpisodeLog&)> on_episode;
  std::function<void(const RoundLog&, const std::vector<Policy>&)> on_round;
  bool measure_time = false;
  /// Overrides max_episodes when positive.
  int episodes = 0;
};

struct TrainingResult {
  std::vector<Policy> agents;
  std::vector<EpisodeLog> episodes;
  std::vector<RoundLog> rounds;
};

/// Federated multi-agent policy-gradient training. Every agent updates after
/// each episode; every agg_interval episodes the trunks are aggregated,
/// broadcast and locally fine-tuned.
TrainingResult run_training(const ScenarioConfig& config, Scenario scenario, std::uint64_t seed,
                            const TrainingHooks& hooks = {});

/// Identical initial parameters for every agent.
std::vector<Policy> initial_policies(const ScenarioConfig& config, std::uint64_t seed);

PolicyFn learned_policy(std::vector<Policy> agents, bool stochastic);
PolicyFn no_defense();
PolicyFn random_defense();
PolicyFn periodic_defense(int period);

struct EpisodeOutcome {
  std::uint64_t seed = 0;
  int episode = 0;
  EpisodeMetrics metrics;
  std::vector<int> cost_curve;
};

/// Plays one episode; the environment and policy draw from disjoint streams
/// of `episode_rng`. The step trace is copied to `trace` when given.
EpisodeOutcome play_episode(const ScenarioConfig& config, Scenario scenario, const Rng& episode_rng,
                            const PolicyFn& policy, EpisodeTrace* trace = nullptr);

using TraceSink = std::function<void(const EpisodeOutcome&, const EpisodeTrace&)>;

/// Episodes e = 0..episodes-1 for every seed in [first_seed, last_seed].
std::vector<EpisodeOutcome> evaluate(const ScenarioConfig& config, Scenario scenario,
                                     const PolicyFn& policy, std::uint64_t first_seed,
                                     std::uint64_t last_seed, int episodes,
                                     const TraceSink& sink = {});

struct EvalSummary {
  int episodes = 0;
  double mitigation_mean = 0.0;
  double mitigation_std = 0.0;
  double recovery_mean = 0.0;  // mean of per-episode means; 0 when no outage occurred
  int episodes_with_outage = 0;
  double energy_mean = 0.0;
  double cost_mean = 0.0;
  double return_mean = 0.0;
};

EvalSummary summarize(const std::vector<EpisodeOutcome>& outcomes);

}  // namespace uavmtd
