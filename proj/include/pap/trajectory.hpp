#pragma once

#include <array>
#include <stdexcept>
#include <string>

#include "pap/se3.hpp"

namespace pap {

struct TrajectoryState {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  Vec3 acceleration = Vec3::Zero();

  static TrajectoryState at_rest(const Vec3& p) { return {p, Vec3::Zero(), Vec3::Zero()}; }
  bool finite() const;
};

/// Raised when the thrust direction is undefined (commanded free fall).
class InfeasibleStateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fifth-order polynomial that starts at a given state and comes to rest at
/// its end position:
///
///   s(t) = alpha/120 t^5 + beta/24 t^4 + gamma/6 t^3 + a0/2 t^2 + v0 t + p0
///
/// The trajectory also carries the goal used by the yaw law (the vehicle
/// always faces the goal) and the yaw to hold when the goal is directly
/// above or below the vehicle.
class QuinticTrajectory {
 public:
  QuinticTrajectory(const TrajectoryState& start, const Vec3& alpha, const Vec3& beta,
                    const Vec3& gamma, double duration, const Vec3& goal, double hold_yaw);

  double duration() const { return duration_; }
  const TrajectoryState& start() const { return start_; }
  const Vec3& goal() const { return goal_; }
  double hold_yaw() const { return hold_yaw_; }
  const Vec3& alpha() const { return alpha_; }
  const Vec3& beta() const { return beta_; }
  const Vec3& gamma() const { return gamma_; }

  /// Power-basis coefficients c[i] (per axis) of s(t) = sum c[i] t^i.
  const std::array<Vec3, 6>& coefficients() const { return coeffs_; }

  /// Throws std::out_of_range unless 0 <= t <= T.
  TrajectoryState evaluate(double t) const;

  Vec3 position(double t) const;
  Vec3 velocity(double t) const;
  Vec3 acceleration(double t) const;
  Vec3 jerk(double t) const;

  Vec3 end_position() const { return position(duration_); }

  /// Heading toward the goal, in (-pi, pi]. Throws std::out_of_range unless
  /// 0 <= t <= T.
  double yaw_at(double t) const;

 private:
  double checked_time(double t) const;

  TrajectoryState start_;
  Vec3 alpha_, beta_, gamma_;
  double duration_;
  Vec3 goal_;
  double hold_yaw_;
  std::array<Vec3, 6> coeffs_;
};

/// Closed-form minimum-jerk trajectory from `start` to rest at `end_position`
/// after `duration` seconds. Throws std::invalid_argument for non-positive or
/// non-finite durations.
QuinticTrajectory solve_min_jerk(const TrajectoryState& start, const Vec3& end_position,
                                 double duration, const Vec3& goal, double hold_yaw = 0.0);
QuinticTrajectory solve_min_jerk(const TrajectoryState& start, const Vec3& end_position,
                                 double duration);

/// Stationary trajectory resting at p for `duration` seconds.
QuinticTrajectory hover_trajectory(const Vec3& p, double duration, const Vec3& goal,
                                   double hold_yaw);

/// Yaw of the horizontal direction from `position` to `goal`; returns
/// `fallback` when the two coincide in x-y.
double heading_to(const Vec3& goal, const Vec3& position, double fallback);

/// Wraps an angle to (-pi, pi].
double wrap_angle(double a);

struct FlatState {
  RigidTransform pose;  // T^WB
  Vec3 velocity = Vec3::Zero();
  Vec3 body_rate = Vec3::Zero();  // omega, body frame
  double yaw = 0.0;
};

inline const Vec3 kDefaultGravity{0.0, 0.0, -9.81};

/// Attitude and body rates implied by the trajectory under the multirotor
/// flatness map. Throws InfeasibleStateError when |s'' - g| is ~0.
FlatState flat_state_at(const QuinticTrajectory& traj, double t,
                        const Vec3& gravity = kDefaultGravity);

struct FeasibilityLimits {
  double max_speed = 3.0;          // m/s
  double min_thrust_accel = 2.0;   // m/s^2
  double max_thrust_accel = 25.0;  // m/s^2
  double max_body_rate = 6.0;      // rad/s
  Vec3 gravity = kDefaultGravity;

  /// Throws std::invalid_argument when the limits are inconsistent.
  void validate() const;
};

enum class FeasibilityViolation { kNone, kSpeed, kThrustLow, kThrustHigh, kBodyRate, kFreeFall };

struct FeasibilityResult {
  bool feasible = true;
  FeasibilityViolation violation = FeasibilityViolation::kNone;
  double time = 0.0;  // first violating sample
  std::string description;
};

inline constexpr double kFeasibilityStep = 0.02;

/// Dense-sampling input feasibility check (t = 0, dt, 2dt, ..., T).
FeasibilityResult check_feasibility(const QuinticTrajectory& traj, const FeasibilityLimits& limits,
                                    double dt = kFeasibilityStep);

}  // namespace pap
