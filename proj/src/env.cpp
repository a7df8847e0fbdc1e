#include "uavmtd/env.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace uavmtd {

double compute_reward(const RewardInputs& in, const ScenarioConfig& config) {
  const auto& k = config.reward;
  const double formation = 1.0 - in.deviation / config.deviation_threshold;
  const double attack = in.node_attacked + 0.5 * in.upstream_jammed;
  const double span = config.v_max - config.v_pat;
  const double velocity = span > 0.0 ? (in.speed - config.v_pat) / span : 0.0;
  return k.connectivity * in.connected + k.formation * formation - k.cost * in.cost -
         k.attack * attack - k.velocity * velocity;
}

namespace {

int delay_steps(double tau, double dt) {
  return std::max(1, static_cast<int>(std::lround(tau / dt)));
}

}  // namespace

SwarmEnv::SwarmEnv(ScenarioConfig config, Scenario scenario)
    : config_(std::move(config)),
      scenario_(scenario),
      formation_(FormationSpec<double>::from_config(config_)) {
  validate(config_);
  delays_.leader = delay_steps(config_.tau_exec_leader, config_.dt);
  delays_.route = delay_steps(config_.tau_exec_route, config_.dt);
  delays_.freq = delay_steps(config_.tau_exec_freq, config_.dt);
}

std::vector<Observation> SwarmEnv::reset(std::uint64_t seed) { return reset(Rng(seed)); }

std::vector<Observation> SwarmEnv::reset(const Rng& episode_rng) {
  env_rng_ = episode_rng.split("environment");
  attack_rng_ = episode_rng.split("attacker");

  const int n = config_.n_uavs;
  state_ = SwarmState{};
  state_.uavs.reserve(static_cast<std::size_t>(n));
  for (int u = 0; u < n; ++u) state_.uavs.push_back(initial_kinematics(formation_, u, n));

  const int channel =
      static_cast<int>(env_rng_.uniform_index(static_cast<std::uint64_t>(config_.n_channels)));
  state_.mtd = initial_mtd_state(n, channel);
  state_.heartbeat = HeartbeatTracker(n, config_.heartbeat_window);

  const CommGraph radio = radio_graph();
  state_.attack = init_attack(scenario_.strategy, scenario_.kind,
                              AttackTiming{config_.tau_atk, config_.tau_recon},
                              AttackView{radio, state_.mtd.defense.leader, channel}, attack_rng_);
  evaluate_connectivity({}, false);

  trace_ = EpisodeTrace{};
  trace_.dt = config_.dt;
  trace_.n_uavs = n;
  trace_.gcs = Vec3<double>(config_.gcs_position[0], config_.gcs_position[1], config_.gcs_position[2]);
  trace_.steps.reserve(static_cast<std::size_t>(config_.steps_per_episode));
  return observations();
}

void SwarmEnv::set_attack(const AttackState& attack) {
  state_.attack = attack;
  evaluate_connectivity({}, false);
}

std::vector<Vec3<double>> SwarmEnv::node_positions() const {
  std::vector<Vec3<double>> p;
  p.reserve(state_.uavs.size() + 1);
  p.emplace_back(config_.gcs_position[0], config_.gcs_position[1], config_.gcs_position[2]);
  for (const auto& k : state_.uavs) p.push_back(k.position);
  return p;
}

CommGraph SwarmEnv::radio_graph() const {
  const auto positions = node_positions();
  const std::vector<int> channels(positions.size(), state_.mtd.defense.channel);
  return build_graph(positions, channels, config_.comm_range);
}

void SwarmEnv::evaluate_connectivity(std::span<const int> relay_actions, bool maintain_routes) {
  const auto positions = node_positions();
  const std::vector<int> channels(positions.size(), state_.mtd.defense.channel);
  const CommGraph radio = build_graph(positions, channels, config_.comm_range);
  const auto& atk = state_.attack;

  state_.node_attacked.assign(positions.size(), false);
  for (std::size_t node = 1; node < positions.size(); ++node) {
    state_.node_attacked[node] = node_effective(atk, static_cast<int>(node), channels);
  }
  std::vector<Link> suppressed;
  if (atk.kind == AttackKind::link && link_effective(atk, atk.target_link, radio)) {
    suppressed.push_back(atk.target_link);
  }

  state_.graph = build_graph(positions, channels, config_.comm_range, suppressed,
                             state_.mtd.defense.routes);
  if (maintain_routes) {
    resolve_route_mutation(relay_actions, state_.mtd, state_.graph, atk, state_.node_attacked,
                           positions, state_.t, delays_.route);
    state_.graph.routes = state_.mtd.defense.routes;
  }

  const int leader = state_.mtd.defense.leader;
  state_.link_jammed.assign(state_.uavs.size(), 0);
  for (std::size_t u = 0; u < state_.uavs.size(); ++u) {
    const int node = node_of(static_cast<int>(u));
    state_.link_jammed[u] = link_effective(atk, Link(upstream_of(node, leader), node), state_.graph);
  }
  state_.e = connectivity(state_.graph, leader, state_.node_attacked);
}

StepResult SwarmEnv::step(std::span<const MtdCommand> actions) {
  if (done()) throw std::logic_error("step() called on a finished episode");
  const int n = config_.n_uavs;
  if (static_cast<int>(actions.size()) != n) {
    throw std::invalid_argument("step() expects one command per UAV");
  }
  const int t = state_.t;

  const AppliedEffects applied = apply_due_effects(state_.mtd, t, config_.n_channels, env_rng_);

  if (t > 0) {
    const CommGraph radio = radio_graph();
    state_.attack = tick_attack(
        state_.attack, AttackView{radio, state_.mtd.defense.leader, state_.mtd.defense.channel},
        config_.dt, attack_rng_);
  }

  std::vector<int> claims(n), relays(n), votes(n);
  for (int u = 0; u < n; ++u) {
    claims[u] = actions[u].leader_claim;
    relays[u] = actions[u].relay;
    votes[u] = actions[u].hop;
  }
  evaluate_connectivity(relays, true);

  std::vector<double> scores(n);
  for (int u = 0; u < n; ++u) scores[u] = state_.heartbeat.score(u);
  resolve_leader_switch(claims, scores, state_.mtd, t, delays_.leader);
  resolve_frequency_hop(votes, state_.mtd, t, delays_.freq);

  StepRecord rec;
  rec.t = t;
  rec.leader = state_.mtd.defense.leader;
  rec.channel = state_.mtd.defense.channel;
  rec.attack_active = state_.attack.active();
  rec.hopped = applied.hopped;
  rec.leader_switched = applied.leader_switched;
  rec.routes_active = static_cast<int>(state_.mtd.defense.routes.size());
  rec.e = state_.e;
  rec.actions.assign(actions.begin(), actions.end());
  {
    const auto positions = node_positions();
    rec.separation_violations = static_cast<int>(
        check_separation<double>(std::span(positions).subspan(1), config_.d_min).size());
  }

  for (int u = 0; u < n; ++u) {
    state_.uavs[u] = step_kinematics(state_.uavs[u], formation_, state_.e[u] != 0, config_.dt);
  }

  StepResult result;
  result.rewards.resize(n);
  rec.node_effective.resize(n);
  rec.link_effective.resize(n);
  rec.cost.resize(n);
  rec.speed.resize(n);
  rec.deviation.resize(n);
  rec.reward.resize(n);
  for (int u = 0; u < n; ++u) {
    RewardInputs in;
    in.connected = state_.e[u];
    in.deviation = formation_deviation(state_.uavs[u], formation_);
    in.cost = action_cost(actions[u]);
    in.node_attacked = state_.node_attacked[node_of(u)] ? 1 : 0;
    in.upstream_jammed = state_.link_jammed[u];
    in.speed = state_.uavs[u].speed;
    result.rewards[u] = compute_reward(in, config_);

    rec.node_effective[u] = in.node_attacked;
    rec.link_effective[u] = in.upstream_jammed;
    rec.cost[u] = in.cost;
    rec.speed[u] = in.speed;
    rec.deviation[u] = in.deviation;
    rec.reward[u] = result.rewards[u];
  }

  state_.heartbeat.update(state_.e);
  rec.heartbeat_connected.resize(n);
  for (int u = 0; u < n; ++u) {
    rec.heartbeat_connected[u] =
        state_.heartbeat.is_disconnected(u, config_.heartbeat_threshold) ? 0 : 1;
  }
  trace_.steps.push_back(std::move(rec));

  state_.t = t + 1;
  result.done = done();
  if (result.done) {
    trace_.final_positions.clear();
    for (const auto& k : state_.uavs) trace_.final_positions.push_back(k.position);
  }
  result.observations = observations();
  return result;
}

Observation SwarmEnv::observation(int uav) const {
  const int n = config_.n_uavs;
  Observation o = Observation::Zero(config_.observation_dim());
  const auto& k = state_.uavs[static_cast<std::size_t>(uav)];
  o(0) = k.position.x() / config_.area_size[0];
  o(1) = k.position.y() / config_.area_size[1];
  o(2) = k.position.z() / config_.area_size[0];
  const double span = config_.v_max - config_.v_pat;
  o(3) = span > 0.0 ? (k.speed - config_.v_pat) / span : 0.0;
  o(4) = std::sin(k.heading);
  o(5) = std::cos(k.heading);
  o(6 + uav_of(state_.mtd.defense.leader)) = 1.0;
  o(6 + n + state_.mtd.defense.channel) = 1.0;
  o(6 + n + config_.n_channels) = state_.e[static_cast<std::size_t>(uav)];
  return o.cwiseMax(-1.0).cwiseMin(1.0);
}

std::vector<Observation> SwarmEnv::observations() const {
  std::vector<Observation> out;
  out.reserve(state_.uavs.size());
  for (int u = 0; u < static_cast<int>(state_.uavs.size()); ++u) out.push_back(observation(u));
  return out;
}

}  // namespace uavmtd
