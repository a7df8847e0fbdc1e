#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace uavmtd {

/// Raised for malformed configuration text or a violated invariant.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class AggregationWeighting {
  automatic,  // raw when every recent return is positive, shifted otherwise
  raw,
  shifted,
};

std::string_view to_string(AggregationWeighting w);
AggregationWeighting parse_aggregation_weighting(std::string_view text);

/// Reward coefficients in the (alpha, beta, xi, eta, zeta) order of the
/// parameter table: connectivity, formation, velocity, attack, cost.
struct RewardCoeffs {
  double connectivity = 0.5;  // alpha
  double formation = 0.5;     // beta
  double velocity = 1.0;      // xi
  double attack = 2.0;        // eta
  double cost = 0.5;          // zeta

  bool operator==(const RewardCoeffs&) const = default;
};

/// UAV propulsion power model constants.
struct PowerModel {
  double c1 = 2.8037;  // (m/kg)^(1/2)
  double c2 = 0.3177;  // (m/kg)^(1/2)
  double c3 = 0.0296;  // kg/m
  double mass = 1.283;  // kg
  double gravity = 9.8;  // m/s^2

  bool operator==(const PowerModel&) const = default;
};

/// Every scenario parameter in one immutable value. Defaults are the
/// reference simulation values.
struct ScenarioConfig {
  // Geometry
  std::array<double, 2> area_size{1000.0, 1000.0};
  std::array<double, 3> gcs_position{500.0, 500.0, 0.0};
  double patrol_radius = 300.0;
  double patrol_height = 100.0;
  int n_uavs = 5;
  int n_channels = 5;
  double comm_range = 500.0;
  double v_pat = 15.0;
  double v_max = 20.0;
  double d_min = 20.0;
  double deviation_threshold = 40.0;

  // Attack and defense timing (seconds)
  double tau_atk = 15.0;
  double tau_recon = 5.0;
  double tau_exec_leader = 1.0;
  double tau_exec_route = 1.0;
  double tau_exec_freq = 1.0;

  // Episode
  int steps_per_episode = 50;
  double dt = 1.0;

  // Learning
  int max_episodes = 2000;
  double gamma = 0.99;
  std::vector<int> hidden_sizes{64, 64};
  double lr = 1e-3;
  int batch_size = 128;
  int buffer_capacity = 20000;
  int agg_interval = 20;
  int reward_window = 20;
  int finetune_steps = 100;
  int finetune_recent_episodes = 5;
  RewardCoeffs reward{};
  double entropy_coeff = 0.01;
  AggregationWeighting aggregation_weighting = AggregationWeighting::automatic;

  // Heartbeat detection
  int heartbeat_window = 3;
  double heartbeat_threshold = 0.5;

  PowerModel power{};

  bool operator==(const ScenarioConfig&) const = default;

  double angular_speed() const { return v_pat / patrol_radius; }
  double tau_eff() const { return tau_atk + tau_recon; }
  int observation_dim() const { return 3 + 1 + 2 + n_uavs + n_channels + 1; }
};

/// Throws ConfigError naming the first violated invariant.
void validate(const ScenarioConfig& config);

/// Parses `key = value` lines; `#` starts a comment; arrays are comma lists.
/// Keys not present keep their defaults.
ScenarioConfig parse_config(std::string_view text);

ScenarioConfig load_config(const std::filesystem::path& path);

/// Emits every key in the same format parse_config accepts. Doubles are
/// written in shortest round-trip form.
std::string serialize(const ScenarioConfig& config);

}  // namespace uavmtd
