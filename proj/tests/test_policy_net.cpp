#include <doctest.h>

#include <cmath>

#include "uavmtd/policy_net.hpp"

using namespace uavmtd;

namespace {

Policy random_policy_params(int in, std::vector<int> hidden, std::uint64_t seed, double scale = 1.0) {
  Rng rng(seed);
  Policy p = Policy::initialized(in, hidden, rng);
  p.for_each_layer([&](DenseLayer<double>& l) {
    l.weight *= scale;
    for (Eigen::Index i = 0; i < l.bias.size(); ++i) l.bias(i) = 0.2 * (rng.uniform() - 0.5);
  });
  return p;
}

PolicyBatch<double> random_batch(int in, int b, Rng& rng) {
  PolicyBatch<double> batch;
  batch.observations = Eigen::MatrixXd(in, b);
  for (Eigen::Index i = 0; i < batch.observations.size(); ++i) {
    batch.observations.data()[i] = 2 * rng.uniform() - 1;
  }
  for (int k = 0; k < 3; ++k) {
    batch.actions[k].resize(b);
    for (int i = 0; i < b; ++i) batch.actions[k](i) = static_cast<int>(rng.uniform_index(kHeadSizes[k]));
  }
  batch.advantages = Eigen::VectorXd(b);
  for (int i = 0; i < b; ++i) batch.advantages(i) = 2 * rng.uniform() - 1;
  return batch;
}

// Independent per-sample evaluation of the loss.
double reference_loss(const Policy& p, const PolicyBatch<double>& batch, double mu) {
  double total = 0.0;
  for (Eigen::Index b = 0; b < batch.size(); ++b) {
    std::vector<double> x(batch.observations.col(b).data(),
                          batch.observations.col(b).data() + batch.observations.rows());
    for (const auto& l : p.shared) {
      std::vector<double> y(static_cast<std::size_t>(l.out_dim()));
      for (Eigen::Index r = 0; r < l.out_dim(); ++r) {
        double acc = l.bias(r);
        for (Eigen::Index c = 0; c < l.in_dim(); ++c) acc += l.weight(r, c) * x[c];
        y[r] = acc > 0 ? acc : 0.0;
      }
      x = y;
    }
    for (int k = 0; k < 3; ++k) {
      const auto& h = p.heads[k];
      std::vector<double> z(static_cast<std::size_t>(h.out_dim()));
      double zmax = -1e300;
      for (Eigen::Index r = 0; r < h.out_dim(); ++r) {
        z[r] = h.bias(r);
        for (Eigen::Index c = 0; c < h.in_dim(); ++c) z[r] += h.weight(r, c) * x[c];
        zmax = std::max(zmax, z[r]);
      }
      double norm = 0.0;
      for (double& v : z) norm += std::exp(v - zmax);
      double entropy = 0.0;
      for (double v : z) {
        const double q = std::exp(v - zmax) / norm;
        entropy -= q * std::log(q + 1e-12);
      }
      const double q_a = std::exp(z[batch.actions[k](b)] - zmax) / norm;
      total += std::log(q_a) * batch.advantages(b) + mu * entropy;
    }
  }
  return -total / static_cast<double>(batch.size());
}

}  // namespace

TEST_CASE("zero weights give uniform heads") {
  const std::vector<int> hidden{8, 8};
  const Policy p = Policy::zeros(5, hidden);
  const auto probs = forward<double>(p, Eigen::VectorXd::Random(5));
  CHECK(probs[0].isApprox(Eigen::Vector2d(0.5, 0.5)));
  CHECK(probs[1].isApprox(Eigen::Vector3d::Constant(1.0 / 3.0)));
  CHECK(probs[2].isApprox(Eigen::Vector2d(0.5, 0.5)));
}

TEST_CASE("heads are distributions and forward is deterministic") {
  const auto p = random_policy_params(17, {64, 64}, 3, 4.0);
  Rng rng(1);
  for (int i = 0; i < 50; ++i) {
    Eigen::VectorXd o(17);
    for (int j = 0; j < 17; ++j) o(j) = 2 * rng.uniform() - 1;
    const auto a = forward<double>(p, o);
    const auto b = forward<double>(p, Eigen::VectorXd(o + Eigen::VectorXd::Zero(17)));
    for (int k = 0; k < 3; ++k) {
      CHECK(std::abs(a[k].sum() - 1.0) < 1e-12);
      CHECK(a[k].minCoeff() > 0.0);
      CHECK(a[k] == b[k]);
      const double h = categorical_entropy<double>(a[k]);
      CHECK(h >= -1e-12);
      CHECK(h <= std::log(static_cast<double>(kHeadSizes[k])) + 1e-12);
    }
  }
  CHECK_THROWS_AS(forward<double>(p, Eigen::VectorXd::Zero(16)), std::invalid_argument);
}

TEST_CASE("sampling frequencies under uniform heads") {
  const std::vector<int> hidden{4};
  const Policy p = Policy::zeros(3, hidden);
  Rng rng(21);
  const int n = 100000;
  std::array<std::array<int, 3>, 3> counts{};
  for (int i = 0; i < n; ++i) {
    const auto s = sample_action<double>(p, Eigen::VectorXd::Zero(3), rng);
    for (int k = 0; k < 3; ++k) counts[k][s.index[k]]++;
    CHECK(s.log_prob == doctest::Approx(2 * std::log(0.5) + std::log(1.0 / 3.0)));
  }
  for (int k = 0; k < 3; ++k) {
    const double q = 1.0 / kHeadSizes[k];
    const double sigma = std::sqrt(n * q * (1 - q));
    for (int j = 0; j < kHeadSizes[k]; ++j) CHECK(std::abs(counts[k][j] - n * q) < 3 * sigma);
  }
}

TEST_CASE("degenerate head is sampled surely") {
  const std::vector<int> hidden{4};
  Policy p = Policy::zeros(3, hidden);
  p.heads[kRelayHead].bias = Eigen::Vector3d(800.0, 0.0, 0.0);
  Rng rng(2);
  for (int i = 0; i < 1000; ++i) {
    const auto s = sample_action<double>(p, Eigen::VectorXd::Zero(3), rng);
    CHECK(s.index[kRelayHead] == 0);
    CHECK(s.command.relay == -1);
  }
}

TEST_CASE("sampling is reproducible and log-probs add up") {
  const auto p = random_policy_params(6, {8, 8}, 5, 3.0);
  Rng a(9), b(9);
  for (int i = 0; i < 200; ++i) {
    Eigen::VectorXd o = Eigen::VectorXd::Constant(6, 0.1 * (i % 7));
    const auto sa = sample_action<double>(p, o, a);
    const auto sb = sample_action<double>(p, o, b);
    CHECK(sa.index == sb.index);
    const auto probs = forward<double>(p, o);
    double lp = 0.0;
    for (int k = 0; k < 3; ++k) lp += std::log(probs[k](sa.index[k]));
    CHECK(sa.log_prob == lp);
  }
}

TEST_CASE("relay index mapping") {
  CHECK(command_from_indices({1, 0, 1}) == MtdCommand{1, -1, 1});
  CHECK(command_from_indices({0, 1, 0}) == MtdCommand{0, 0, 0});
  CHECK(command_from_indices({0, 2, 0}) == MtdCommand{0, 1, 0});
  for (int l = 0; l < 2; ++l)
    for (int r = 0; r < 3; ++r)
      for (int f = 0; f < 2; ++f) CHECK(indices_from_command(command_from_indices({l, r, f})) == std::array{l, r, f});
}

TEST_CASE("greedy action takes the argmax") {
  const std::vector<int> hidden{4};
  Policy p = Policy::zeros(3, hidden);
  p.heads[kLeaderHead].bias = Eigen::Vector2d(0.1, 0.2);
  p.heads[kRelayHead].bias = Eigen::Vector3d(0.3, 0.2, 0.1);
  p.heads[kHopHead].bias = Eigen::Vector2d(0.0, 0.0);
  const auto g = greedy_action<double>(p, Eigen::VectorXd::Zero(3));
  CHECK(g.index == std::array{1, 0, 0});
}

TEST_CASE("reward-to-go") {
  const std::vector<double> r{1, 1, 1};
  const auto ret = compute_returns<double>(r, 0.99);
  CHECK(ret.reward_to_go(0) == doctest::Approx(2.9701));
  CHECK(ret.reward_to_go(1) == doctest::Approx(1.99));
  CHECK(ret.reward_to_go(2) == doctest::Approx(1.0));

  const std::vector<double> mixed{3, -1, 2, 5};
  const auto myopic = compute_returns<double>(mixed, 0.0);
  for (int t = 0; t < 4; ++t) CHECK(myopic.reward_to_go(t) == mixed[t]);
  CHECK(myopic.normalized.mean() == doctest::Approx(0.0).epsilon(1e-12));

  const std::vector<double> flat{2, 2, 2, 2};
  const auto c = compute_returns<double>(flat, 0.0);
  CHECK(c.normalized.cwiseAbs().maxCoeff() < 1e-6);
  CHECK_THROWS(compute_returns<double>(std::vector<double>{}, 0.9));
}

TEST_CASE("analytic gradient matches central differences") {
  Rng rng(1234);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int in = 4;
    const auto p = random_policy_params(in, {6, 5}, 100 + trial, 2.0);
    const auto batch = random_batch(in, 7, rng);
    const double mu = 0.05;
    const auto lg = policy_loss_gradient(p, batch, mu);
    CHECK(lg.loss == doctest::Approx(reference_loss(p, batch, mu)).epsilon(1e-10));

    const Eigen::VectorXd theta = flatten(p);
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
      Policy plus = p, minus = p;
      Eigen::VectorXd tp = theta, tm = theta;
      tp(i) += 1e-5;
      tm(i) -= 1e-5;
      unflatten(plus, tp);
      unflatten(minus, tm);
      const double fd = (reference_loss(plus, batch, mu) - reference_loss(minus, batch, mu)) / 2e-5;
      const double err = std::abs(fd - lg.gradient(i)) / std::max(1e-6, std::abs(fd) + std::abs(lg.gradient(i)));
      worst = std::max(worst, err);
    }
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("vanishing objective leaves parameters unchanged") {
  auto p = random_policy_params(5, {8, 8}, 2);
  const Policy before = p;
  Rng rng(3);
  auto batch = random_batch(5, 10, rng);
  batch.advantages.setZero();
  auto opt = PolicyOptimizer::for_params(p, 1e-3);
  const auto lg = policy_loss_gradient(p, batch, 0.0);
  CHECK(lg.gradient.cwiseAbs().maxCoeff() == 0.0);
  policy_gradient_update(p, opt, batch, 0.0);
  CHECK(flatten(p) == flatten(before));
}

TEST_CASE("entropy bonus alone raises mean entropy") {
  Rng rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    auto p = random_policy_params(5, {8, 8}, 40 + trial, 3.0);
    auto batch = random_batch(5, 12, rng);
    batch.advantages.setZero();
    const double h0 = policy_loss_gradient(p, batch, 0.0).mean_entropy;
    auto opt = PolicyOptimizer::for_params(p, 1e-3);
    policy_gradient_update(p, opt, batch, 0.01);
    CHECK(policy_loss_gradient(p, batch, 0.0).mean_entropy > h0);
  }
}

TEST_CASE("first adaptive-moment step is bounded by the learning rate") {
  auto p = random_policy_params(5, {8, 8}, 8);
  const Eigen::VectorXd before = flatten(p);
  Rng rng(4);
  const auto batch = random_batch(5, 9, rng);
  auto opt = PolicyOptimizer::for_params(p, 1e-3);
  policy_gradient_update(p, opt, batch, 0.01);
  CHECK((flatten(p) - before).cwiseAbs().maxCoeff() <= 1e-3 * (1 + 1e-8));
  CHECK(opt.step == 1);
  CHECK(opt.m.size() == before.size());
}

TEST_CASE("non-finite loss is a hard failure") {
  auto p = random_policy_params(5, {8, 8}, 8);
  Rng rng(4);
  auto batch = random_batch(5, 3, rng);
  batch.advantages(1) = std::numeric_limits<double>::quiet_NaN();
  auto opt = PolicyOptimizer::for_params(p, 1e-3);
  const Eigen::VectorXd before = flatten(p);
  CHECK_THROWS_AS(policy_gradient_update(p, opt, batch, 0.01), NumericalError);
  CHECK(flatten(p) == before);
}

TEST_CASE("flatten and unflatten round trip") {
  auto p = random_policy_params(7, {5, 3}, 1);
  const auto theta = flatten(p);
  CHECK(theta.size() == p.size());
  CHECK(p.shared_size() == 7 * 5 + 5 + 5 * 3 + 3);
  Policy q = Policy::zeros(7, std::vector<int>{5, 3});
  unflatten(q, theta);
  CHECK(flatten(q) == theta);
}

TEST_CASE("float instantiation") {
  Rng rng(1);
  const std::vector<int> hidden{4};
  const auto p = PolicyParams<float>::initialized(3, hidden, rng);
  const auto probs = forward<float>(p, Eigen::VectorXf::Ones(3));
  CHECK(std::abs(probs[1].sum() - 1.0f) < 1e-6f);
}
