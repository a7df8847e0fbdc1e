#include "uavmtd/training.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

#include "uavmtd/baselines.hpp"
#include "uavmtd/federated.hpp"

namespace uavmtd {

std::vector<Policy> initial_policies(const ScenarioConfig& config, std::uint64_t seed) {
  Rng rng = Rng(seed).split("init");
  const Policy p = Policy::initialized(config.observation_dim(), config.hidden_sizes, rng);
  return std::vector<Policy>(static_cast<std::size_t>(config.n_uavs), p);
}

TrainingResult run_training(const ScenarioConfig& config, Scenario scenario, std::uint64_t seed,
                            const TrainingHooks& hooks) {
  validate(config);
  const int n = config.n_uavs;
  const int total = hooks.episodes > 0 ? hooks.episodes : config.max_episodes;
  const Rng root(seed);

  TrainingResult result;
  result.agents = initial_policies(config, seed);
  std::vector<PolicyOptimizer> opts;
  std::vector<ExperienceBuffer> buffers;
  for (const auto& p : result.agents) {
    opts.push_back(PolicyOptimizer::for_params(p, config.lr));
    buffers.emplace_back(static_cast<std::size_t>(config.buffer_capacity));
  }
  std::vector<std::vector<double>> history(static_cast<std::size_t>(n));

  SwarmEnv env(config, scenario);
  const int T = config.steps_per_episode;
  int rounds = 0;

  for (int k = 0; k < total; ++k) {
    const auto started = std::chrono::steady_clock::now();
    const Rng episode_rng = root.split("episode", static_cast<std::uint64_t>(k));
    std::vector<Rng> agent_rng;
    for (int u = 0; u < n; ++u) agent_rng.push_back(episode_rng.split("agent", static_cast<std::uint64_t>(u)));

    auto obs = env.reset(episode_rng);
    std::vector<PolicyBatch<double>> batches(static_cast<std::size_t>(n));
    std::vector<std::vector<double>> rewards(static_cast<std::size_t>(n));
    for (auto& b : batches) {
      b.observations.resize(config.observation_dim(), T);
      for (auto& a : b.actions) a.resize(T);
      b.advantages.resize(T);
    }

    std::vector<MtdCommand> cmds(static_cast<std::size_t>(n));
    for (int t = 0; t < T; ++t) {
      for (int u = 0; u < n; ++u) {
        const auto s = sample_action(result.agents[u], obs[u], agent_rng[u]);
        batches[u].observations.col(t) = obs[u];
        for (int h = 0; h < 3; ++h) batches[u].actions[h](t) = s.index[h];
        cmds[u] = s.command;
      }
      auto step = env.step(cmds);
      for (int u = 0; u < n; ++u) rewards[u].push_back(step.rewards[u]);
      obs = std::move(step.observations);
    }

    for (int u = 0; u < n; ++u) {
      const auto ret = compute_returns<double>(rewards[u], config.gamma);
      batches[u].advantages = ret.normalized;
      policy_gradient_update(result.agents[u], opts[u], batches[u], config.entropy_coeff);

      std::vector<Transition> stored(static_cast<std::size_t>(T));
      for (int t = 0; t < T; ++t) {
        stored[t].observation = batches[u].observations.col(t);
        for (int h = 0; h < 3; ++h) stored[t].action[h] = batches[u].actions[h](t);
        stored[t].normalized_return = ret.normalized(t);
      }
      buffers[u].add_episode(std::move(stored));
      history[u].push_back(std::accumulate(rewards[u].begin(), rewards[u].end(), 0.0));
    }

    if ((k + 1) % config.agg_interval == 0) {
      RoundLog round;
      round.round = ++rounds;
      round.episode = k;
      for (int u = 0; u < n; ++u) {
        round.recent_returns.push_back(recent_average_return(history[u], config.reward_window));
      }
      round.weights = aggregation_weights(round.recent_returns, config.aggregation_weighting);
      const auto global = aggregate_shared(result.agents, round.weights);
      const Rng ft_rng = root.split("finetune", static_cast<std::uint64_t>(round.round));
      for (int u = 0; u < n; ++u) {
        Rng r = ft_rng.split("agent", static_cast<std::uint64_t>(u));
        round.finetune_steps = fine_tune(result.agents[u], opts[u], global, buffers[u],
                                         config.finetune_steps, config.batch_size,
                                         config.finetune_recent_episodes, config.entropy_coeff, r);
      }
      if (hooks.on_round) hooks.on_round(round, result.agents);
      result.rounds.push_back(std::move(round));
    }

    EpisodeLog log;
    log.episode = k;
    log.metrics = episode_metrics(env.trace(), config);
    log.mean_return = std::accumulate(log.metrics.returns.begin(), log.metrics.returns.end(), 0.0) / n;
    log.agg_round = rounds;
    if (hooks.measure_time) {
      log.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
    }
    if (hooks.on_episode) hooks.on_episode(log);
    result.episodes.push_back(std::move(log));
  }
  return result;
}

PolicyFn learned_policy(std::vector<Policy> agents, bool stochastic) {
  return [agents = std::move(agents), stochastic](int agent, int, const Observation& obs, Rng& rng) {
    const auto& p = agents.at(static_cast<std::size_t>(agent));
    return stochastic ? sample_action(p, obs, rng).command : greedy_action(p, obs).command;
  };
}

PolicyFn no_defense() {
  return [](int, int, const Observation& obs, Rng&) { return no_defense_policy(obs); };
}

PolicyFn random_defense() {
  return [](int, int, const Observation& obs, Rng& rng) { return random_policy(obs, rng); };
}

PolicyFn periodic_defense(int period) {
  return [p = PeriodicHopPolicy(period)](int agent, int t, const Observation&, Rng&) { return p(agent, t); };
}

EpisodeOutcome play_episode(const ScenarioConfig& config, Scenario scenario, const Rng& episode_rng,
                            const PolicyFn& policy, EpisodeTrace* trace) {
  SwarmEnv env(config, scenario);
  auto obs = env.reset(episode_rng);
  std::vector<Rng> rng;
  for (int u = 0; u < config.n_uavs; ++u) rng.push_back(episode_rng.split("agent", static_cast<std::uint64_t>(u)));
  std::vector<MtdCommand> cmds(static_cast<std::size_t>(config.n_uavs));
  while (!env.done()) {
    const int t = env.state().t;
    for (int u = 0; u < config.n_uavs; ++u) cmds[u] = policy(u, t, obs[u], rng[u]);
    obs = env.step(cmds).observations;
  }
  EpisodeOutcome out;
  out.metrics = episode_metrics(env.trace(), config);
  out.cost_curve = cumulative_cost_curve(env.trace());
  if (trace) *trace = env.trace();
  return out;
}

std::vector<EpisodeOutcome> evaluate(const ScenarioConfig& config, Scenario scenario,
                                     const PolicyFn& policy, std::uint64_t first_seed,
                                     std::uint64_t last_seed, int episodes,
                                     const TraceSink& sink) {
  std::vector<EpisodeOutcome> out;
  EpisodeTrace trace;
  for (std::uint64_t s = first_seed; s <= last_seed; ++s) {
    const Rng root = Rng(s).split("eval");
    for (int e = 0; e < episodes; ++e) {
      auto o = play_episode(config, scenario, root.split("episode", static_cast<std::uint64_t>(e)), policy,
                            sink ? &trace : nullptr);
      o.seed = s;
      o.episode = e;
      if (sink) sink(o, trace);
      out.push_back(std::move(o));
    }
  }
  return out;
}

EvalSummary summarize(const std::vector<EpisodeOutcome>& outcomes) {
  EvalSummary s;
  s.episodes = static_cast<int>(outcomes.size());
  if (outcomes.empty()) return s;
  double rec = 0.0;
  for (const auto& o : outcomes) {
    const auto& m = o.metrics;
    s.mitigation_mean += m.mitigation_rate;
    s.energy_mean += m.energy;
    s.cost_mean += m.cumulative_cost;
    s.return_mean += std::accumulate(m.returns.begin(), m.returns.end(), 0.0) /
                     static_cast<double>(m.returns.size());
    if (m.mean_recovery) {
      rec += *m.mean_recovery;
      ++s.episodes_with_outage;
    }
  }
  const double n = static_cast<double>(outcomes.size());
  s.mitigation_mean /= n;
  s.energy_mean /= n;
  s.cost_mean /= n;
  s.return_mean /= n;
  s.recovery_mean = s.episodes_with_outage > 0 ? rec / s.episodes_with_outage : 0.0;
  double var = 0.0;
  for (const auto& o : outcomes) var += std::pow(o.metrics.mitigation_rate - s.mitigation_mean, 2);
  s.mitigation_std = std::sqrt(var / n);
  return s;
}

}  // namespace uavmtd
