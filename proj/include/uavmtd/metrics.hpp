#pragma once

#include <optional>
#include <vector>

#include "uavmtd/config.hpp"
#include "uavmtd/env.hpp"

namespace uavmtd {

struct EpisodeMetrics {
  double mitigation_rate = 1.0;
  std::vector<double> recovery_times;  // seconds, one per outage
  std::optional<double> mean_recovery;  // empty when there was no outage
  double energy = 0.0;                  // joules
  int cumulative_cost = 0;
  std::vector<double> returns;  // per agent, undiscounted
};

/// Rotor power (W) at airspeed v.
double power(double v, const PowerModel& pm);

/// Patrol energy plus a straight return leg at v_max from each final position
/// to the GCS.
double episode_energy(const EpisodeTrace& trace, const PowerModel& pm, double v_max);

/// Mean over steps of the fraction of UAVs that are heartbeat-connected.
double mitigation_rate(const EpisodeTrace& trace);

/// Lengths (s) of the maximal intervals with at least one heartbeat-
/// disconnected UAV. An outage still open at the end counts up to T.
std::vector<double> recovery_times(const EpisodeTrace& trace);

int cumulative_cost(const EpisodeTrace& trace);
/// Running total of the swarm's action cost after each step.
std::vector<int> cumulative_cost_curve(const EpisodeTrace& trace);

EpisodeMetrics episode_metrics(const EpisodeTrace& trace, const ScenarioConfig& config);

}  // namespace uavmtd
