#pragma once

#include <array>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "uavmtd/mtd.hpp"
#include "uavmtd/rng.hpp"

namespace uavmtd {

/// Raised when a loss or gradient stops being finite.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Output heads: leader claim bit, relay trit, hop vote bit.
enum HeadId : int { kLeaderHead = 0, kRelayHead = 1, kHopHead = 2 };
inline constexpr std::array<int, 3> kHeadSizes{2, 3, 2};

/// Relay head index {0, 1, 2} <-> trit {-1, 0, +1}.
inline int relay_trit(int index) { return index - 1; }
inline int relay_index(int trit) { return trit + 1; }

inline MtdCommand command_from_indices(const std::array<int, 3>& idx) {
  return MtdCommand{idx[kLeaderHead], relay_trit(idx[kRelayHead]), idx[kHopHead]};
}

inline std::array<int, 3> indices_from_command(const MtdCommand& cmd) {
  return {cmd.leader_claim, relay_index(cmd.relay), cmd.hop};
}

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
struct DenseLayer {
  MatrixX<Scalar> weight;  // out x in
  VectorX<Scalar> bias;    // out

  Eigen::Index in_dim() const { return weight.cols(); }
  Eigen::Index out_dim() const { return weight.rows(); }
  Eigen::Index size() const { return weight.size() + bias.size(); }
};

/// Two-part policy network: a rectified-linear trunk whose parameters are
/// shared across agents during aggregation, and three softmax heads that
/// never leave the agent.
template <typename Scalar>
struct PolicyParams {
  std::vector<DenseLayer<Scalar>> shared;
  std::array<DenseLayer<Scalar>, 3> heads;

  Eigen::Index input_dim() const { return shared.front().in_dim(); }
  Eigen::Index trunk_dim() const { return shared.back().out_dim(); }

  Eigen::Index shared_size() const {
    Eigen::Index n = 0;
    for (const auto& l : shared) n += l.size();
    return n;
  }
  Eigen::Index size() const {
    Eigen::Index n = shared_size();
    for (const auto& h : heads) n += h.size();
    return n;
  }

  static PolicyParams zeros(int input_dim, std::span<const int> hidden) {
    PolicyParams p;
    int in = input_dim;
    for (int h : hidden) {
      p.shared.push_back({MatrixX<Scalar>::Zero(h, in), VectorX<Scalar>::Zero(h)});
      in = h;
    }
    for (int k = 0; k < 3; ++k) {
      p.heads[k] = {MatrixX<Scalar>::Zero(kHeadSizes[k], in), VectorX<Scalar>::Zero(kHeadSizes[k])};
    }
    return p;
  }

  /// Fan-in scaled uniform weights U(-1/sqrt(in), 1/sqrt(in)); zero biases.
  static PolicyParams initialized(int input_dim, std::span<const int> hidden, Rng& rng) {
    PolicyParams p = zeros(input_dim, hidden);
    auto fill = [&rng](DenseLayer<Scalar>& l) {
      const Scalar bound = Scalar(1) / std::sqrt(Scalar(l.in_dim()));
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) {
        for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
          l.weight(r, c) = bound * Scalar(2.0 * rng.uniform() - 1.0);
        }
      }
    };
    for (auto& l : p.shared) fill(l);
    for (auto& h : p.heads) fill(h);
    return p;
  }

  template <typename F>
  void for_each_layer(F&& f) {
    for (auto& l : shared) f(l);
    for (auto& h : heads) f(h);
  }
  template <typename F>
  void for_each_layer(F&& f) const {
    for (const auto& l : shared) f(l);
    for (const auto& h : heads) f(h);
  }
};

/// Packs weights (column-major) then bias for every layer, trunk first.
template <typename Scalar>
VectorX<Scalar> flatten(const PolicyParams<Scalar>& p) {
  VectorX<Scalar> out(p.size());
  Eigen::Index at = 0;
  p.for_each_layer([&](const DenseLayer<Scalar>& l) {
    out.segment(at, l.weight.size()) = l.weight.reshaped();
    at += l.weight.size();
    out.segment(at, l.bias.size()) = l.bias;
    at += l.bias.size();
  });
  return out;
}

template <typename Scalar>
void unflatten(PolicyParams<Scalar>& p, const VectorX<Scalar>& flat) {
  if (flat.size() != p.size()) throw std::invalid_argument("unflatten: size mismatch");
  Eigen::Index at = 0;
  p.for_each_layer([&](DenseLayer<Scalar>& l) {
    l.weight.reshaped() = flat.segment(at, l.weight.size());
    at += l.weight.size();
    l.bias = flat.segment(at, l.bias.size());
    at += l.bias.size();
  });
}

/// Column-wise softmax with max subtraction.
template <typename Scalar>
MatrixX<Scalar> softmax_columns(const MatrixX<Scalar>& logits) {
  MatrixX<Scalar> out = logits.rowwise() - logits.colwise().maxCoeff();
  out = out.array().exp().matrix();
  out.array().rowwise() /= out.colwise().sum().array();
  return out;
}

inline constexpr double kEntropyGuard = 1e-12;

template <typename Scalar>
Scalar categorical_entropy(const VectorX<Scalar>& p) {
  return -(p.array() * (p.array() + Scalar(kEntropyGuard)).log()).sum();
}

/// Activations kept for backpropagation. Columns are batch samples.
template <typename Scalar>
struct ForwardCache {
  std::vector<MatrixX<Scalar>> inputs;  // input to each trunk layer
  MatrixX<Scalar> trunk;                // final trunk activation
  std::array<MatrixX<Scalar>, 3> probs;
};

template <typename Scalar>
ForwardCache<Scalar> forward_batch(const PolicyParams<Scalar>& p, const MatrixX<Scalar>& obs) {
  if (obs.rows() != p.input_dim()) {
    throw std::invalid_argument("policy forward: observation has " + std::to_string(obs.rows()) +
                                " entries, network expects " + std::to_string(p.input_dim()));
  }
  ForwardCache<Scalar> c;
  MatrixX<Scalar> x = obs;
  for (const auto& l : p.shared) {
    c.inputs.push_back(x);
    x = ((l.weight * x).colwise() + l.bias).cwiseMax(Scalar(0));
  }
  c.trunk = x;
  for (int k = 0; k < 3; ++k) {
    const auto& h = p.heads[k];
    c.probs[k] = softmax_columns<Scalar>((h.weight * c.trunk).colwise() + h.bias);
  }
  return c;
}

template <typename Scalar>
std::array<VectorX<Scalar>, 3> forward(const PolicyParams<Scalar>& p, const VectorX<Scalar>& obs) {
  const auto c = forward_batch<Scalar>(p, obs);
  return {c.probs[0].col(0), c.probs[1].col(0), c.probs[2].col(0)};
}

template <typename Scalar>
struct ActionSample {
  MtdCommand command;
  std::array<int, 3> index{};
  Scalar log_prob{0};
};

/// Inverse-CDF draw from a categorical distribution.
template <typename Scalar>
int sample_categorical(const VectorX<Scalar>& probs, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    acc += static_cast<double>(probs(i));
    if (u < acc) return static_cast<int>(i);
  }
  // Rounding can leave acc marginally below 1; fall back to the last
  // index with nonzero mass.
  for (Eigen::Index i = probs.size() - 1; i > 0; --i) {
    if (probs(i) > Scalar(0)) return static_cast<int>(i);
  }
  return 0;
}

template <typename Scalar>
ActionSample<Scalar> sample_action(const PolicyParams<Scalar>& p, const VectorX<Scalar>& obs, Rng& rng) {
  const auto probs = forward<Scalar>(p, obs);
  ActionSample<Scalar> s;
  for (int k = 0; k < 3; ++k) {
    s.index[k] = sample_categorical<Scalar>(probs[k], rng);
    s.log_prob += std::log(probs[k](s.index[k]));
  }
  s.command = command_from_indices(s.index);
  return s;
}

/// Most probable sub-action per head; ties go to the lowest index.
template <typename Scalar>
ActionSample<Scalar> greedy_action(const PolicyParams<Scalar>& p, const VectorX<Scalar>& obs) {
  const auto probs = forward<Scalar>(p, obs);
  ActionSample<Scalar> s;
  for (int k = 0; k < 3; ++k) {
    Eigen::Index best = 0;
    probs[k].maxCoeff(&best);
    s.index[k] = static_cast<int>(best);
    s.log_prob += std::log(probs[k](best));
  }
  s.command = command_from_indices(s.index);
  return s;
}

template <typename Scalar>
struct Returns {
  VectorX<Scalar> reward_to_go;
  VectorX<Scalar> normalized;
};

inline constexpr double kReturnStdGuard = 1e-8;

/// Discounted reward-to-go and its per-episode standardization.
template <typename Scalar>
Returns<Scalar> compute_returns(std::span<const Scalar> rewards, Scalar gamma) {
  if (rewards.empty()) throw std::invalid_argument("compute_returns: empty reward sequence");
  const auto n = static_cast<Eigen::Index>(rewards.size());
  Returns<Scalar> r;
  r.reward_to_go.resize(n);
  Scalar acc{0};
  for (Eigen::Index t = n - 1; t >= 0; --t) {
    acc = rewards[static_cast<std::size_t>(t)] + gamma * acc;
    r.reward_to_go(t) = acc;
  }
  const Scalar mean = r.reward_to_go.mean();
  const Scalar var = (r.reward_to_go.array() - mean).square().mean();
  r.normalized = (r.reward_to_go.array() - mean) / (std::sqrt(var) + Scalar(kReturnStdGuard));
  return r;
}

/// Samples for one loss evaluation: observation columns, chosen head
/// indices and the return weights.
template <typename Scalar>
struct PolicyBatch {
  MatrixX<Scalar> observations;            // input_dim x B
  std::array<Eigen::VectorXi, 3> actions;  // B each
  VectorX<Scalar> advantages;              // B

  Eigen::Index size() const { return observations.cols(); }
};

template <typename Scalar>
struct LossGradient {
  Scalar loss{0};
  Scalar mean_entropy{0};
  VectorX<Scalar> gradient;  // flatten() layout
};

/// L = -(1/B) sum_b [ log pi(a_b|o_b) * A_b + mu * H(pi(.|o_b)) ] with H
/// summed over the three heads, and its exact gradient.
template <typename Scalar>
LossGradient<Scalar> policy_loss_gradient(const PolicyParams<Scalar>& p,
                                          const PolicyBatch<Scalar>& batch, Scalar entropy_coeff) {
  const Eigen::Index B = batch.size();
  if (B == 0) throw std::invalid_argument("policy_loss_gradient: empty batch");
  const auto cache = forward_batch<Scalar>(p, batch.observations);
  const Scalar inv_b = Scalar(1) / Scalar(B);
  const Scalar eps = Scalar(kEntropyGuard);

  LossGradient<Scalar> out;
  PolicyParams<Scalar> grad = PolicyParams<Scalar>::zeros(
      static_cast<int>(p.input_dim()), [&] {
        std::vector<int> hidden;
        for (const auto& l : p.shared) hidden.push_back(static_cast<int>(l.out_dim()));
        return hidden;
      }());

  MatrixX<Scalar> d_trunk = MatrixX<Scalar>::Zero(p.trunk_dim(), B);
  Scalar log_prob_term{0};
  Scalar entropy_term{0};

  for (int k = 0; k < 3; ++k) {
    const MatrixX<Scalar>& P = cache.probs[k];
    const MatrixX<Scalar> logp = (P.array() + eps).log().matrix();
    // dH/dp = -log(p + eps) - p / (p + eps)
    const MatrixX<Scalar> dH_dp = (-logp.array() - P.array() / (P.array() + eps)).matrix();
    MatrixX<Scalar> d_logits(P.rows(), B);
    for (Eigen::Index b = 0; b < B; ++b) {
      const int a = batch.actions[k](b);
      const Scalar adv = batch.advantages(b);
      const auto pcol = P.col(b);
      log_prob_term += std::log(pcol(a)) * adv;
      entropy_term += -(pcol.array() * logp.col(b).array()).sum();

      // d(log p_a)/dz = onehot(a) - p
      VectorX<Scalar> g_logp = -pcol;
      g_logp(a) += Scalar(1);
      // dH/dz_j = p_j (g_j - sum_k g_k p_k)
      const Scalar gp = dH_dp.col(b).dot(pcol);
      VectorX<Scalar> g_ent = (pcol.array() * (dH_dp.col(b).array() - gp)).matrix();
      d_logits.col(b) = -inv_b * (adv * g_logp + entropy_coeff * g_ent);
    }
    grad.heads[k].weight = d_logits * cache.trunk.transpose();
    grad.heads[k].bias = d_logits.rowwise().sum();
    d_trunk.noalias() += p.heads[k].weight.transpose() * d_logits;
  }

  MatrixX<Scalar> delta = d_trunk;
  for (int l = static_cast<int>(p.shared.size()) - 1; l >= 0; --l) {
    const MatrixX<Scalar> out_act =
        (l + 1 < static_cast<int>(p.shared.size())) ? cache.inputs[static_cast<std::size_t>(l + 1)]
                                                    : cache.trunk;
    delta = (out_act.array() > Scalar(0)).select(delta, Scalar(0));
    const auto& in = cache.inputs[static_cast<std::size_t>(l)];
    grad.shared[static_cast<std::size_t>(l)].weight = delta * in.transpose();
    grad.shared[static_cast<std::size_t>(l)].bias = delta.rowwise().sum();
    if (l > 0) delta = p.shared[static_cast<std::size_t>(l)].weight.transpose() * delta;
  }

  out.loss = -inv_b * (log_prob_term + entropy_coeff * entropy_term);
  out.mean_entropy = inv_b * entropy_term;
  out.gradient = flatten(grad);
  return out;
}

/// Adaptive-moment optimizer state over the flattened parameter vector.
template <typename Scalar>
struct AdamState {
  VectorX<Scalar> m;
  VectorX<Scalar> v;
  long long step = 0;
  Scalar lr{1e-3};
  Scalar beta1{0.9};
  Scalar beta2{0.999};
  Scalar eps{1e-8};

  static AdamState for_params(const PolicyParams<Scalar>& p, Scalar lr) {
    AdamState s;
    s.m = VectorX<Scalar>::Zero(p.size());
    s.v = VectorX<Scalar>::Zero(p.size());
    s.lr = lr;
    return s;
  }
};

template <typename Scalar>
void adam_step(PolicyParams<Scalar>& p, const VectorX<Scalar>& grad, AdamState<Scalar>& s) {
  s.step += 1;
  s.m = s.beta1 * s.m + (Scalar(1) - s.beta1) * grad;
  s.v = s.beta2 * s.v + (Scalar(1) - s.beta2) * grad.cwiseAbs2();
  const Scalar c1 = Scalar(1) - std::pow(s.beta1, Scalar(s.step));
  const Scalar c2 = Scalar(1) - std::pow(s.beta2, Scalar(s.step));
  const VectorX<Scalar> update =
      s.lr * ((s.m / c1).array() / ((s.v / c2).array().sqrt() + s.eps)).matrix();
  unflatten(p, VectorX<Scalar>(flatten(p) - update));
}

/// One policy-gradient step on `batch`. Throws NumericalError when the loss
/// or gradient is not finite; the parameters are left untouched then.
template <typename Scalar>
Scalar policy_gradient_update(PolicyParams<Scalar>& p, AdamState<Scalar>& opt,
                              const PolicyBatch<Scalar>& batch, Scalar entropy_coeff) {
  const auto lg = policy_loss_gradient(p, batch, entropy_coeff);
  if (!std::isfinite(lg.loss) || !lg.gradient.allFinite()) {
    throw NumericalError("non-finite policy loss or gradient at optimizer step " +
                         std::to_string(opt.step + 1));
  }
  adam_step(p, lg.gradient, opt);
  return lg.loss;
}

using Policy = PolicyParams<double>;
using PolicyOptimizer = AdamState<double>;

}  // namespace uavmtd
