#include <doctest.h>

#include <cmath>
#include <numbers>

#include "uavmtd/swarm_dynamics.hpp"

using namespace uavmtd;

namespace {

FormationSpec<double> reference_spec() { return FormationSpec<double>::from_config(ScenarioConfig{}); }

void check_vec(const Vec3<double>& a, const Vec3<double>& b, double tol = 1e-9) {
  CHECK((a - b).norm() < tol);
}

}  // namespace

TEST_CASE("ideal positions") {
  const auto spec = reference_spec();
  check_vec(ideal_position(spec, 0.0), {800, 500, 100});
  check_vec(ideal_position(spec, std::numbers::pi / 2), {500, 800, 100});
  check_vec(ideal_position(spec, std::numbers::pi), {200, 500, 100});
}

TEST_CASE("phase advance") {
  CHECK(reference_spec().angular_speed == doctest::Approx(0.05));
  CHECK(advance_phase(0.0, 0.05, 1.0) == doctest::Approx(0.05));
  CHECK(advance_phase(0.0, 0.05, 0.0) == 0.0);
  CHECK(advance_phase(2 * std::numbers::pi - 0.01, 0.05, 1.0) == doctest::Approx(0.04));
  for (double t = 0; t < 500; t += 7.3) {
    const double th = advance_phase(1.0, 0.05, t);
    CHECK(th >= 0.0);
    CHECK(th < 2 * std::numbers::pi);
  }
}

TEST_CASE("connected on-circle tracking") {
  const auto spec = reference_spec();
  auto k = initial_kinematics(spec, 0, 5);
  CHECK(k.phase == 0.0);
  k = step_kinematics(k, spec, true, 1.0);
  CHECK(k.phase == doctest::Approx(0.05));
  CHECK(k.speed == 15.0);
  CHECK(formation_deviation(k, spec) < spec.deviation_threshold);

  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    k = step_kinematics(k, spec, true, 1.0);
    worst = std::max(worst, formation_deviation(k, spec));
    CHECK(k.speed == 15.0);
  }
  CHECK(worst < spec.deviation_threshold);
}

TEST_CASE("catch-up at v_max toward the ideal point") {
  const auto spec = reference_spec();
  auto k = initial_kinematics(spec, 0, 5);
  k.position.x() += 100.0;
  const auto next = step_kinematics(k, spec, true, 1.0);
  CHECK(next.speed == 20.0);
  const Vec3<double> goal = ideal_position(spec, next.phase);
  const double bearing = std::atan2(goal.y() - k.position.y(), goal.x() - k.position.x());
  CHECK(std::cos(next.heading - bearing) == doctest::Approx(1.0));
}

TEST_CASE("deviation strictly decreases while beyond the threshold") {
  const auto spec = reference_spec();
  for (double offset : {50.0, 120.0, 200.0}) {
    auto k = initial_kinematics(spec, 2, 5);
    k.position.y() -= offset;
    double dev = formation_deviation(k, spec);
    int steps = 0;
    while (dev > spec.deviation_threshold) {
      k = step_kinematics(k, spec, true, 1.0);
      const double next = formation_deviation(k, spec);
      CHECK(next < dev);
      dev = next;
      REQUIRE(++steps < 60);
    }
  }
}

TEST_CASE("disconnected drift matches a fine-step integrator") {
  const auto spec = reference_spec();
  auto k = initial_kinematics(spec, 1, 5);
  const Vec3<double> p0 = k.position;
  const double h0 = k.heading;
  const double theta0 = k.phase;
  for (int t = 0; t < 5; ++t) k = step_kinematics(k, spec, false, 1.0);
  CHECK(k.target_phase == theta0);
  CHECK(k.speed == 15.0);

  Vec3<double> p = p0;
  for (int i = 0; i < 500; ++i) {
    p.x() += 15.0 * 0.01 * std::cos(h0);
    p.y() += 15.0 * 0.01 * std::sin(h0);
  }
  const Vec3<double> ideal = spec.center + spec.radius * Vec3<double>(std::cos(theta0 + 0.25),
                                                                      std::sin(theta0 + 0.25), 0.0);
  CHECK(formation_deviation(k, spec) == doctest::Approx((p - ideal).norm()).epsilon(1e-9));
  CHECK(formation_deviation(k, spec) > 1.0);
}

TEST_CASE("separation check") {
  const auto spec = reference_spec();
  std::vector<Vec3<double>> ring;
  for (int i = 0; i < 5; ++i) ring.push_back(initial_kinematics(spec, i, 5).position);
  CHECK(check_separation<double>(ring, 20.0).empty());
  CHECK((ring[0] - ring[1]).norm() == doctest::Approx(2 * 300 * std::sin(std::numbers::pi / 5)));
  CHECK((ring[0] - ring[1]).norm() == doctest::Approx(352.7).epsilon(1e-3));

  std::vector<Vec3<double>> close{{0, 0, 0}, {10, 0, 0}};
  const auto v = check_separation<double>(close, 20.0);
  REQUIRE(v.size() == 1);
  CHECK(v[0] == std::pair{0, 1});

  std::vector<Vec3<double>> one{{0, 0, 0}};
  CHECK(check_separation<double>(one, 20.0).empty());
}

TEST_CASE("templated on scalar") {
  const auto spec = FormationSpec<float>::from_config(ScenarioConfig{});
  auto k = initial_kinematics(spec, 0, 5);
  k = step_kinematics(k, spec, true, 1.0f);
  CHECK(k.speed == 15.0f);
}
