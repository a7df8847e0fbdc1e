#include "uavmtd/metrics.hpp"

#include <cmath>
#include <numeric>

namespace uavmtd {

double power(double v, const PowerModel& pm) {
  const double weight = pm.mass * pm.gravity;
  return (pm.c1 + pm.c2) * std::pow(weight, 1.5) + pm.c3 * v * v * v;
}

double episode_energy(const EpisodeTrace& trace, const PowerModel& pm, double v_max) {
  double joules = 0.0;
  for (const auto& s : trace.steps) {
    for (double v : s.speed) joules += power(v, pm) * trace.dt;
  }
  const double p_return = power(v_max, pm);
  for (const auto& p : trace.final_positions) {
    joules += p_return * (p - trace.gcs).norm() / v_max;
  }
  return joules;
}

double mitigation_rate(const EpisodeTrace& trace) {
  if (trace.steps.empty() || trace.n_uavs == 0) return 1.0;
  double acc = 0.0;
  for (const auto& s : trace.steps) {
    const int up = std::accumulate(s.heartbeat_connected.begin(), s.heartbeat_connected.end(), 0);
    acc += static_cast<double>(up) / trace.n_uavs;
  }
  return acc / static_cast<double>(trace.steps.size());
}

std::vector<double> recovery_times(const EpisodeTrace& trace) {
  std::vector<double> out;
  int run = 0;
  for (const auto& s : trace.steps) {
    bool outage = false;
    for (int c : s.heartbeat_connected) outage = outage || c == 0;
    if (outage) {
      ++run;
    } else if (run > 0) {
      out.push_back(run * trace.dt);
      run = 0;
    }
  }
  if (run > 0) out.push_back(run * trace.dt);
  return out;
}

int cumulative_cost(const EpisodeTrace& trace) {
  const auto curve = cumulative_cost_curve(trace);
  return curve.empty() ? 0 : curve.back();
}

std::vector<int> cumulative_cost_curve(const EpisodeTrace& trace) {
  std::vector<int> out;
  out.reserve(trace.steps.size());
  int total = 0;
  for (const auto& s : trace.steps) {
    total += std::accumulate(s.cost.begin(), s.cost.end(), 0);
    out.push_back(total);
  }
  return out;
}

EpisodeMetrics episode_metrics(const EpisodeTrace& trace, const ScenarioConfig& config) {
  EpisodeMetrics m;
  m.mitigation_rate = mitigation_rate(trace);
  m.recovery_times = recovery_times(trace);
  if (!m.recovery_times.empty()) {
    m.mean_recovery = std::accumulate(m.recovery_times.begin(), m.recovery_times.end(), 0.0) /
                      static_cast<double>(m.recovery_times.size());
  }
  m.energy = episode_energy(trace, config.power, config.v_max);
  m.cumulative_cost = cumulative_cost(trace);
  m.returns.assign(static_cast<std::size_t>(trace.n_uavs), 0.0);
  for (const auto& s : trace.steps) {
    for (std::size_t u = 0; u < s.reward.size(); ++u) m.returns[u] += s.reward[u];
  }
  return m;
}

}  // namespace uavmtd
