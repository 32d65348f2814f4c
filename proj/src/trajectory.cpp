#include "pap/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace pap {

namespace {

// Horizontal distance below which the heading to the goal is undefined.
constexpr double kYawSingularDistance = 1e-9;
// Symmetric finite-difference step for the yaw rate.
constexpr double kYawRateStep = 1e-4;
// Thrust acceleration below which the body z-axis is undefined.
constexpr double kMinThrustNorm = 1e-6;
// Slack on the time domain for round-off in callers' time arithmetic.
constexpr double kTimeSlack = 1e-9;

}  // namespace

bool TrajectoryState::finite() const {
  return position.allFinite() && velocity.allFinite() && acceleration.allFinite();
}

double wrap_angle(double a) {
  constexpr double kPi = std::numbers::pi;
  a = std::remainder(a, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

double heading_to(const Vec3& goal, const Vec3& position, double fallback) {
  const double dx = goal.x() - position.x();
  const double dy = goal.y() - position.y();
  if (std::hypot(dx, dy) <= kYawSingularDistance) return fallback;
  return wrap_angle(std::atan2(dy, dx));
}

QuinticTrajectory::QuinticTrajectory(const TrajectoryState& start, const Vec3& alpha,
                                     const Vec3& beta, const Vec3& gamma, double duration,
                                     const Vec3& goal, double hold_yaw)
    : start_(start),
      alpha_(alpha),
      beta_(beta),
      gamma_(gamma),
      duration_(duration),
      goal_(goal),
      hold_yaw_(hold_yaw) {
  if (!(duration > 0.0) || !std::isfinite(duration)) {
    throw std::invalid_argument("trajectory duration must be positive and finite");
  }
  coeffs_[0] = start.position;
  coeffs_[1] = start.velocity;
  coeffs_[2] = start.acceleration / 2.0;
  coeffs_[3] = gamma / 6.0;
  coeffs_[4] = beta / 24.0;
  coeffs_[5] = alpha / 120.0;
}

double QuinticTrajectory::checked_time(double t) const {
  if (!(t >= -kTimeSlack && t <= duration_ + kTimeSlack)) {
    std::ostringstream msg;
    msg << "time " << t << " outside trajectory domain [0, " << duration_ << "]";
    throw std::out_of_range(msg.str());
  }
  return std::clamp(t, 0.0, duration_);
}

Vec3 QuinticTrajectory::position(double t) const {
  const auto& c = coeffs_;
  return ((((c[5] * t + c[4]) * t + c[3]) * t + c[2]) * t + c[1]) * t + c[0];
}

Vec3 QuinticTrajectory::velocity(double t) const {
  const auto& c = coeffs_;
  return (((5.0 * c[5] * t + 4.0 * c[4]) * t + 3.0 * c[3]) * t + 2.0 * c[2]) * t + c[1];
}

Vec3 QuinticTrajectory::acceleration(double t) const {
  const auto& c = coeffs_;
  return ((20.0 * c[5] * t + 12.0 * c[4]) * t + 6.0 * c[3]) * t + 2.0 * c[2];
}

Vec3 QuinticTrajectory::jerk(double t) const {
  const auto& c = coeffs_;
  return (60.0 * c[5] * t + 24.0 * c[4]) * t + 6.0 * c[3];
}

TrajectoryState QuinticTrajectory::evaluate(double t) const {
  t = checked_time(t);
  return {position(t), velocity(t), acceleration(t)};
}

double QuinticTrajectory::yaw_at(double t) const {
  t = checked_time(t);
  // At the singularity, walk back in time until the heading is defined again.
  double tau = t;
  double back = 1e-6;
  while (true) {
    const Vec3 p = position(tau);
    const double dx = goal_.x() - p.x();
    const double dy = goal_.y() - p.y();
    if (std::hypot(dx, dy) > kYawSingularDistance) return wrap_angle(std::atan2(dy, dx));
    if (tau <= 0.0) return hold_yaw_;
    tau = std::max(0.0, t - back);
    back *= 2.0;
  }
}

QuinticTrajectory solve_min_jerk(const TrajectoryState& start, const Vec3& end_position,
                                 double duration, const Vec3& goal, double hold_yaw) {
  if (!(duration > 0.0) || !std::isfinite(duration)) {
    throw std::invalid_argument("min-jerk duration must be positive and finite");
  }
  const double T = duration;
  const double T2 = T * T;
  const double T3 = T2 * T;
  const double T4 = T3 * T;
  const double T5 = T4 * T;

  // Residual boundary errors left over by the free (a0, v0, p0) terms.
  const Vec3 dp = end_position -
                  (start.position + start.velocity * T + 0.5 * start.acceleration * T2);
  const Vec3 dv = -(start.velocity + start.acceleration * T);
  const Vec3 da = -start.acceleration;

  // Inverse of the 3x3 boundary system
  //   [T^5/120 T^4/24 T^3/6] [alpha]   [dp]
  //   [T^4/24  T^3/6  T^2/2] [beta ] = [dv]
  //   [T^3/6   T^2/2  T    ] [gamma]   [da]
  const Vec3 alpha = (720.0 * dp - 360.0 * T * dv + 60.0 * T2 * da) / T5;
  const Vec3 beta = (-360.0 * T * dp + 168.0 * T2 * dv - 24.0 * T3 * da) / T5;
  const Vec3 gamma = (60.0 * T2 * dp - 24.0 * T3 * dv + 3.0 * T4 * da) / T5;

  return {start, alpha, beta, gamma, duration, goal, hold_yaw};
}

QuinticTrajectory solve_min_jerk(const TrajectoryState& start, const Vec3& end_position,
                                 double duration) {
  return solve_min_jerk(start, end_position, duration, end_position, 0.0);
}

QuinticTrajectory hover_trajectory(const Vec3& p, double duration, const Vec3& goal,
                                   double hold_yaw) {
  return {TrajectoryState::at_rest(p), Vec3::Zero(), Vec3::Zero(), Vec3::Zero(),
          duration, goal, hold_yaw};
}

FlatState flat_state_at(const QuinticTrajectory& traj, double t, const Vec3& gravity) {
  const TrajectoryState s = traj.evaluate(t);
  t = std::clamp(t, 0.0, traj.duration());

  const Vec3 thrust = s.acceleration - gravity;
  const double thrust_norm = thrust.norm();
  if (thrust_norm < kMinThrustNorm) {
    throw InfeasibleStateError("thrust direction undefined (free fall)");
  }

  const double yaw = traj.yaw_at(t);
  const double t_lo = std::max(0.0, t - kYawRateStep);
  const double t_hi = std::min(traj.duration(), t + kYawRateStep);
  const double yaw_rate = wrap_angle(traj.yaw_at(t_hi) - traj.yaw_at(t_lo)) / (t_hi - t_lo);

  const Vec3 z_b = thrust / thrust_norm;
  const Vec3 x_c(std::cos(yaw), std::sin(yaw), 0.0);
  const Vec3 n = z_b.cross(x_c);
  const double n_norm = n.norm();
  if (n_norm < kMinThrustNorm) {
    throw InfeasibleStateError("thrust axis aligned with heading");
  }
  const Vec3 y_b = n / n_norm;
  const Vec3 x_b = y_b.cross(z_b);

  // Time derivatives of the body axes; omega follows from R^T dR/dt.
  const Vec3 j = traj.jerk(t);
  const Vec3 z_b_dot = (j - z_b * z_b.dot(j)) / thrust_norm;
  const Vec3 x_c_dot = yaw_rate * Vec3(-std::sin(yaw), std::cos(yaw), 0.0);
  const Vec3 n_dot = z_b_dot.cross(x_c) + z_b.cross(x_c_dot);
  const Vec3 y_b_dot = (n_dot - y_b * y_b.dot(n_dot)) / n_norm;
  const Vec3 x_b_dot = y_b_dot.cross(z_b) + y_b.cross(z_b_dot);

  Mat3 R;
  R.col(0) = x_b;
  R.col(1) = y_b;
  R.col(2) = z_b;

  FlatState out;
  out.pose = RigidTransform(R, s.position);
  out.velocity = s.velocity;
  out.body_rate = Vec3(z_b.dot(y_b_dot), x_b.dot(z_b_dot), y_b.dot(x_b_dot));
  out.yaw = yaw;
  return out;
}

void FeasibilityLimits::validate() const {
  if (!(max_speed > 0.0)) throw std::invalid_argument("max_speed must be positive");
  if (!(min_thrust_accel >= 0.0)) throw std::invalid_argument("min thrust must be >= 0");
  if (!(max_thrust_accel > min_thrust_accel)) {
    throw std::invalid_argument("max thrust must exceed min thrust");
  }
  if (!(max_body_rate > 0.0)) throw std::invalid_argument("max_body_rate must be positive");
  if (!gravity.allFinite()) throw std::invalid_argument("gravity must be finite");
}

FeasibilityResult check_feasibility(const QuinticTrajectory& traj,
                                    const FeasibilityLimits& limits, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("feasibility step must be positive");

  const double T = traj.duration();
  const auto steps = static_cast<long>(std::floor(T / dt));
  auto fail = [](FeasibilityViolation v, double t, const std::string& what) {
    std::ostringstream msg;
    msg << what << " at t=" << t;
    return FeasibilityResult{false, v, t, msg.str()};
  };

  for (long k = 0; k <= steps + 1; ++k) {
    const double t = k <= steps ? std::min(T, k * dt) : T;
    if (k == steps + 1 && steps * dt >= T) break;

    const Vec3 v = traj.velocity(t);
    if (v.norm() > limits.max_speed) return fail(FeasibilityViolation::kSpeed, t, "speed limit");

    const double thrust = (traj.acceleration(t) - limits.gravity).norm();
    if (thrust < limits.min_thrust_accel) {
      return fail(FeasibilityViolation::kThrustLow, t, "thrust below minimum");
    }
    if (thrust > limits.max_thrust_accel) {
      return fail(FeasibilityViolation::kThrustHigh, t, "thrust above maximum");
    }
    try {
      const FlatState fs = flat_state_at(traj, t, limits.gravity);
      if (fs.body_rate.norm() > limits.max_body_rate) {
        return fail(FeasibilityViolation::kBodyRate, t, "body rate limit");
      }
    } catch (const InfeasibleStateError&) {
      return fail(FeasibilityViolation::kFreeFall, t, "degenerate thrust");
    }
  }
  return {};
}

}  // namespace pap
