#pragma once

#include <deque>
#include <span>
#include <vector>

#include "uavmtd/config.hpp"
#include "uavmtd/env.hpp"
#include "uavmtd/policy_net.hpp"
#include "uavmtd/rng.hpp"

namespace uavmtd {

inline constexpr double kAggregationEpsilon = 1e-6;

/// Mean of the last min(M, available) episode totals.
double recent_average_return(std::span<const double> history, int window);

/// Aggregation weights from recent returns. `automatic` uses the raw
/// proportional rule when every return is positive and the shifted rule
/// otherwise. Equal returns give uniform weights in every mode.
std::vector<double> aggregation_weights(std::span<const double> returns,
                                        AggregationWeighting mode = AggregationWeighting::automatic);

/// Weighted elementwise mean of the trunk layers; heads are not read.
std::vector<DenseLayer<double>> aggregate_shared(std::span<const Policy> agents,
                                                 std::span<const double> weights);

/// One stored policy-gradient sample.
struct Transition {
  Observation observation;
  std::array<int, 3> action{};
  double normalized_return = 0.0;
};

/// Per-agent episode-grouped replay store. Whole episodes are evicted
/// oldest first to stay within capacity.
class ExperienceBuffer {
 public:
  explicit ExperienceBuffer(std::size_t capacity = 20000) : capacity_(capacity) {}

  void add_episode(std::vector<Transition> episode);
  std::size_t size() const { return size_; }
  std::size_t episodes() const { return episodes_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return size_ == 0; }
  /// Transitions of the most recent `n` episodes, oldest first.
  std::vector<const Transition*> recent(std::size_t n) const;

 private:
  std::size_t capacity_;
  std::size_t size_ = 0;
  std::deque<std::vector<Transition>> episodes_;
};

PolicyBatch<double> make_batch(std::span<const Transition* const> samples);

/// Overwrites the trunk with `global`, then runs `steps` optimizer steps,
/// each on min(batch_size, available) transitions drawn without
/// replacement from the most recent `recent_episodes` episodes. Returns the
/// number of steps taken (0 when the buffer is empty).
int fine_tune(Policy& params, PolicyOptimizer& opt, const std::vector<DenseLayer<double>>& global,
              const ExperienceBuffer& buffer, int steps, int batch_size, int recent_episodes,
              double entropy_coeff, Rng& rng);

}  // namespace uavmtd
