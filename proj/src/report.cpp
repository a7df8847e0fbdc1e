#include "uavmtd/report.hpp"

#include <charconv>
#include <cmath>
#include <numeric>

namespace uavmtd {

std::string format_number(double v) {
  if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

namespace {

std::string recovery_cell(const EpisodeMetrics& m) {
  return m.mean_recovery ? format_number(*m.mean_recovery) : std::string();
}

double mean_return(const EpisodeMetrics& m) {
  if (m.returns.empty()) return 0.0;
  return std::accumulate(m.returns.begin(), m.returns.end(), 0.0) /
         static_cast<double>(m.returns.size());
}

}  // namespace

std::string episode_csv_header() {
  return "# " + std::string(kEpisodeCsvSchema) +
         "\nepisode,agent,return,mitigation_rate,mean_recovery_s,energy_J,cumulative_cost,agg_round,"
         "wall_ms\n";
}

std::string episode_csv_row(const EpisodeLog& log) {
  const auto& m = log.metrics;
  return std::to_string(log.episode) + ",all," + format_number(log.mean_return) + "," +
         format_number(m.mitigation_rate) + "," + recovery_cell(m) + "," + format_number(m.energy) +
         "," + std::to_string(m.cumulative_cost) + "," + std::to_string(log.agg_round) + "," +
         format_number(log.wall_ms) + "\n";
}

std::string eval_csv_header() {
  return "# " + std::string(kEvalCsvSchema) +
         "\nseed,episode,policy,return,mitigation_rate,mean_recovery_s,energy_J,cumulative_cost\n";
}

std::string eval_csv_row(std::string_view policy, const EpisodeOutcome& o) {
  const auto& m = o.metrics;
  return std::to_string(o.seed) + "," + std::to_string(o.episode) + "," + std::string(policy) + "," +
         format_number(mean_return(m)) + "," + format_number(m.mitigation_rate) + "," +
         recovery_cell(m) + "," + format_number(m.energy) + "," + std::to_string(m.cumulative_cost) +
         "\n";
}

}  // namespace uavmtd
