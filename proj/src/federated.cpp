#include "uavmtd/federated.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace uavmtd {

double recent_average_return(std::span<const double> history, int window) {
  if (history.empty()) throw std::invalid_argument("recent_average_return: no completed episodes");
  if (window < 1) throw std::invalid_argument("recent_average_return: window must be positive");
  const std::size_t n = std::min(history.size(), static_cast<std::size_t>(window));
  const auto tail = history.last(n);
  return std::accumulate(tail.begin(), tail.end(), 0.0) / static_cast<double>(n);
}

std::vector<double> aggregation_weights(std::span<const double> returns, AggregationWeighting mode) {
  if (returns.empty()) throw std::invalid_argument("aggregation_weights: no agents");
  const std::size_t n = returns.size();
  const auto [lo, hi] = std::minmax_element(returns.begin(), returns.end());
  if (*lo == *hi) return std::vector<double>(n, 1.0 / static_cast<double>(n));

  const bool all_positive = *lo > 0.0;
  bool raw = mode == AggregationWeighting::raw;
  if (mode == AggregationWeighting::automatic) raw = all_positive;
  if (raw && !all_positive) {
    throw std::invalid_argument("aggregation_weights: raw weighting needs positive returns");
  }

  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) {
    g[i] = raw ? returns[i] : returns[i] - *lo + kAggregationEpsilon;
  }
  const double total = std::accumulate(g.begin(), g.end(), 0.0);
  for (auto& x : g) x /= total;
  return g;
}

std::vector<DenseLayer<double>> aggregate_shared(std::span<const Policy> agents,
                                                 std::span<const double> weights) {
  if (agents.empty() || agents.size() != weights.size()) {
    throw std::invalid_argument("aggregate_shared: need one weight per agent");
  }
  const auto& ref = agents.front().shared;
  for (const auto& a : agents) {
    bool same = a.shared.size() == ref.size();
    for (std::size_t l = 0; same && l < ref.size(); ++l) {
      same = a.shared[l].weight.rows() == ref[l].weight.rows() &&
             a.shared[l].weight.cols() == ref[l].weight.cols();
    }
    if (!same) throw std::invalid_argument("aggregate_shared: shared layer shape mismatch");
  }
  std::vector<DenseLayer<double>> out;
  for (std::size_t l = 0; l < ref.size(); ++l) {
    DenseLayer<double> acc{Eigen::MatrixXd::Zero(ref[l].weight.rows(), ref[l].weight.cols()),
                           Eigen::VectorXd::Zero(ref[l].bias.size())};
    for (std::size_t i = 0; i < agents.size(); ++i) {
      acc.weight += weights[i] * agents[i].shared[l].weight;
      acc.bias += weights[i] * agents[i].shared[l].bias;
    }
    out.push_back(std::move(acc));
  }
  return out;
}

void ExperienceBuffer::add_episode(std::vector<Transition> episode) {
  if (episode.empty()) return;
  if (episode.size() > capacity_) {
    throw std::invalid_argument("ExperienceBuffer: episode longer than capacity");
  }
  size_ += episode.size();
  episodes_.push_back(std::move(episode));
  while (size_ > capacity_) {
    size_ -= episodes_.front().size();
    episodes_.pop_front();
  }
}

std::vector<const Transition*> ExperienceBuffer::recent(std::size_t n) const {
  std::vector<const Transition*> out;
  const std::size_t first = episodes_.size() > n ? episodes_.size() - n : 0;
  for (std::size_t e = first; e < episodes_.size(); ++e) {
    for (const auto& t : episodes_[e]) out.push_back(&t);
  }
  return out;
}

PolicyBatch<double> make_batch(std::span<const Transition* const> samples) {
  if (samples.empty()) throw std::invalid_argument("make_batch: no samples");
  const auto b = static_cast<Eigen::Index>(samples.size());
  PolicyBatch<double> batch;
  batch.observations.resize(samples.front()->observation.size(), b);
  for (auto& a : batch.actions) a.resize(b);
  batch.advantages.resize(b);
  for (Eigen::Index i = 0; i < b; ++i) {
    const auto& t = *samples[static_cast<std::size_t>(i)];
    batch.observations.col(i) = t.observation;
    for (int k = 0; k < 3; ++k) batch.actions[k](i) = t.action[k];
    batch.advantages(i) = t.normalized_return;
  }
  return batch;
}

int fine_tune(Policy& params, PolicyOptimizer& opt, const std::vector<DenseLayer<double>>& global,
              const ExperienceBuffer& buffer, int steps, int batch_size, int recent_episodes,
              double entropy_coeff, Rng& rng) {
  params.shared = global;
  if (buffer.empty() || steps <= 0) return 0;
  auto pool = buffer.recent(static_cast<std::size_t>(recent_episodes));
  const std::size_t b = std::min(pool.size(), static_cast<std::size_t>(batch_size));
  for (int s = 0; s < steps; ++s) {
    // Partial Fisher-Yates: the first b entries become the sample.
    for (std::size_t i = 0; i < b; ++i) {
      const auto j = i + static_cast<std::size_t>(rng.uniform_index(pool.size() - i));
      std::swap(pool[i], pool[j]);
    }
    policy_gradient_update(params, opt, make_batch(std::span(pool).first(b)), entropy_coeff);
  }
  return steps;
}

}  // namespace uavmtd
