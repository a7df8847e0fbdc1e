#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "uavmtd/config.hpp"

namespace uavmtd {

template <typename Scalar>
using Vec3 = Eigen::Matrix<Scalar, 3, 1>;

/// Wraps an angle into [0, 2*pi).
template <typename Scalar>
Scalar wrap_angle(Scalar a) {
  const Scalar two_pi = Scalar(2) * std::numbers::pi_v<Scalar>;
  a = std::fmod(a, two_pi);
  if (a < Scalar(0)) a += two_pi;
  if (a >= two_pi) a -= two_pi;
  return a;
}

/// Rotating circular formation; angular_speed * radius == v_pat.
template <typename Scalar>
struct FormationSpec {
  Vec3<Scalar> center;
  Scalar radius;
  Scalar angular_speed;
  Scalar v_pat;
  Scalar v_max;
  Scalar deviation_threshold;

  static FormationSpec from_config(const ScenarioConfig& c) {
    return FormationSpec{
        Vec3<Scalar>(Scalar(c.gcs_position[0]), Scalar(c.gcs_position[1]), Scalar(c.patrol_height)),
        Scalar(c.patrol_radius),
        Scalar(c.v_pat / c.patrol_radius),
        Scalar(c.v_pat),
        Scalar(c.v_max),
        Scalar(c.deviation_threshold)};
  }
};

/// Kinematic state of one UAV. `phase` is the clock-driven desired angle;
/// `target_phase` is the last angle received through the command path and
/// stays frozen while the UAV is cut off.
template <typename Scalar>
struct UavKinematics {
  Vec3<Scalar> position = Vec3<Scalar>::Zero();
  Scalar speed{0};
  Scalar heading{0};
  Scalar phase{0};
  Scalar target_phase{0};
};

template <typename Scalar>
Vec3<Scalar> ideal_position(const FormationSpec<Scalar>& spec, Scalar theta) {
  return spec.center + spec.radius * Vec3<Scalar>(std::cos(theta), std::sin(theta), Scalar(0));
}

template <typename Scalar>
Scalar advance_phase(Scalar theta0, Scalar omega, Scalar t) {
  return wrap_angle(theta0 + omega * t);
}

/// Distance from the UAV to the ideal point of its clock-driven phase.
template <typename Scalar>
Scalar formation_deviation(const UavKinematics<Scalar>& k, const FormationSpec<Scalar>& spec) {
  return (k.position - ideal_position(spec, k.phase)).norm();
}

/// Places UAV `index` (0-based) of `n` on the ring with phase 2*pi*index/n,
/// heading tangent to the counter-clockwise patrol.
template <typename Scalar>
UavKinematics<Scalar> initial_kinematics(const FormationSpec<Scalar>& spec, int index, int n) {
  UavKinematics<Scalar> k;
  k.phase = wrap_angle(Scalar(2) * std::numbers::pi_v<Scalar> * Scalar(index) / Scalar(n));
  k.target_phase = k.phase;
  k.position = ideal_position(spec, k.phase);
  k.speed = spec.v_pat;
  k.heading = wrap_angle(k.phase + std::numbers::pi_v<Scalar> / Scalar(2));
  return k;
}

/// One integration step of the patrol movement rule.
///
/// Connected: the received phase catches up with the clock and the UAV
/// steers toward the ideal point, at v_max beyond the deviation threshold and
/// at v_pat inside it (on the circle this is the chord of the ideal motion). Disconnected: the received phase freezes and the UAV keeps
/// its heading at v_pat.
template <typename Scalar>
UavKinematics<Scalar> step_kinematics(UavKinematics<Scalar> k, const FormationSpec<Scalar>& spec,
                                      bool connected, Scalar dt) {
  const Scalar half_pi = std::numbers::pi_v<Scalar> / Scalar(2);
  k.phase = advance_phase(k.phase, spec.angular_speed, dt);

  if (connected) {
    k.target_phase = k.phase;
    const Vec3<Scalar> goal = ideal_position(spec, k.target_phase);
    const Vec3<Scalar> delta = goal - k.position;
    const Scalar gap = std::hypot(delta.x(), delta.y());
    if (gap > spec.deviation_threshold) {
      k.speed = spec.v_max;
      k.heading = wrap_angle(std::atan2(delta.y(), delta.x()));
    } else {
      k.speed = spec.v_pat;
      k.heading = gap > Scalar(1e-9)
                      ? wrap_angle(std::atan2(delta.y(), delta.x()))
                      : wrap_angle(k.target_phase - spec.angular_speed * dt / Scalar(2) + half_pi);
    }
  } else {
    k.speed = spec.v_pat;
  }

  k.speed = std::clamp(k.speed, spec.v_pat, spec.v_max);
  k.position.x() += k.speed * dt * std::cos(k.heading);
  k.position.y() += k.speed * dt * std::sin(k.heading);
  return k;
}

/// All pairs (i, j), i < j, closer than d_min.
template <typename Scalar>
std::vector<std::pair<int, int>> check_separation(std::span<const Vec3<Scalar>> positions,
                                                  Scalar d_min) {
  std::vector<std::pair<int, int>> violations;
  const int n = static_cast<int>(positions.size());
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if ((positions[i] - positions[j]).norm() < d_min) violations.emplace_back(i, j);
    }
  }
  return violations;
}

}  // namespace uavmtd
