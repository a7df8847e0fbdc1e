#pragma once

#include <string>
#include <string_view>

#include "uavmtd/training.hpp"

namespace uavmtd {

inline constexpr std::string_view kEpisodeCsvSchema = "uavmtd-episodes/1";
inline constexpr std::string_view kEvalCsvSchema = "uavmtd-eval/1";

/// Shortest decimal text that parses back to the same double.
std::string format_number(double v);

/// Version comment line plus the column header.
std::string episode_csv_header();
/// One row per episode with agent = "all"; metrics are swarm-level.
std::string episode_csv_row(const EpisodeLog& log);

std::string eval_csv_header();
std::string eval_csv_row(std::string_view policy, const EpisodeOutcome& outcome);

}  // namespace uavmtd
