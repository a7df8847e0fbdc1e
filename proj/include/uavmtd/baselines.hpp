#pragma once

#include <stdexcept>

#include "uavmtd/env.hpp"
#include "uavmtd/mtd.hpp"
#include "uavmtd/rng.hpp"

namespace uavmtd {

/// Always the no-op command.
inline MtdCommand no_defense_policy(const Observation&) { return {}; }

/// Each sub-action uniform and independent.
inline MtdCommand random_policy(const Observation&, Rng& rng) {
  MtdCommand c;
  c.leader_claim = static_cast<int>(rng.uniform_index(2));
  c.relay = static_cast<int>(rng.uniform_index(3)) - 1;
  c.hop = static_cast<int>(rng.uniform_index(2));
  return c;
}

/// Agent 0 votes a hop every `period` steps starting at t = 0; everyone
/// else idles.
class PeriodicHopPolicy {
 public:
  explicit PeriodicHopPolicy(int period) : period_(period) {
    if (period <= 0) throw std::invalid_argument("periodic hop period must be positive");
  }
  MtdCommand operator()(int agent, int t) const {
    MtdCommand c;
    if (agent == 0 && t % period_ == 0) c.hop = 1;
    return c;
  }
  int period() const { return period_; }

 private:
  int period_;
};

}  // namespace uavmtd
