#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <vector>

#include "pap/camera.hpp"
#include "pap/perception_cost.hpp"
#include "pap/pyramid_collision.hpp"
#include "pap/trajectory.hpp"

namespace pap {

/// Camera model and its mount on the vehicle body.
struct SensorRig {
  CameraIntrinsics intrinsics;
  RigidTransform body_to_camera = forward_camera_mount();  // T^BC
};

struct PlannerConfig {
  double k_perc = 100.0;
  int candidates = 200;
  double min_duration = 1.0;  // s
  double max_duration = 4.0;  // s
  // End positions: pixel-uniform over the depth image, depth-uniform in
  // [min_sample_depth, min(l, d_max)].
  double min_sample_depth = 0.5;  // m
  FeasibilityLimits limits;
  CollisionConfig collision;
  PerceptionParams perception;
  double cycle_budget = 0.066;  // s
  bool enforce_cycle_budget = true;
  double goal_tolerance = 0.5;  // m
  std::uint64_t seed = 1;

  void validate() const;
};

struct CandidateEvaluation {
  QuinticTrajectory trajectory;
  double c_perc = 0.0;   // m
  double c_speed = 0.0;  // m/s
  double c_tot = 0.0;
  bool input_feasible = false;
  bool collision_free = false;
  bool perception_valid = false;

  bool valid() const { return input_feasible && collision_free && perception_valid; }
};

/// The trajectory the vehicle is following. `start_time` is the global time
/// at which trajectory time 0 applies.
struct CommittedPlan {
  QuinticTrajectory trajectory;
  double start_time = 0.0;
  double c_tot = 0.0;
  Vec3 goal = Vec3::Zero();

  static CommittedPlan hover(const Vec3& p, double now, double duration, const Vec3& goal,
                             double yaw);

  double local_time(double now) const;
  bool ended(double now) const { return now - start_time >= trajectory.duration(); }
  /// Vehicle state under perfect tracking (held at rest after the end).
  TrajectoryState state_at(double now) const;
  double yaw_at(double now) const;
};

/// Negative average speed toward the goal, -(|g - s(0)| - |g - s(T)|) / T.
double speed_cost(const QuinticTrajectory& traj, const Vec3& goal);

/// Draws `config.candidates` min-jerk trajectories from `state`.
std::vector<QuinticTrajectory> sample_candidates(const TrajectoryState& state,
                                                 const DepthImage& depth,
                                                 const PlannerConfig& config, std::mt19937_64& rng,
                                                 const Vec3& goal, double hold_yaw);

/// Feasibility, then collision, then perception; stops at the first failure.
/// With k_perc = 0 the perception stage is skipped (perception-agnostic).
CandidateEvaluation evaluate_candidate(const QuinticTrajectory& traj, const Vec3& goal,
                                       const FeatureMap& features, PyramidStore& store,
                                       const PlannerConfig& config, const SensorRig& rig);

struct ReplanResult {
  CommittedPlan plan;
  bool replaced = false;
  bool safe_stop = false;  // plan exhausted and nothing valid to continue with
  int evaluated = 0;
  int valid = 0;
  std::optional<CandidateEvaluation> incumbent;  // re-evaluation of the remaining plan
  std::optional<CandidateEvaluation> best;       // best valid candidate
  std::size_t pyramids_generated = 0;
  double elapsed = 0.0;  // wall-clock seconds
  std::shared_ptr<PyramidStore> store;  // this frame's store, for reuse as a keyframe
};

/// What the vehicle remembers from earlier frames.
struct ObstacleMemory {
  RecentReturns returns;
  std::vector<std::shared_ptr<PyramidStore>> keyframes;  // newest first
};

/// One receding-horizon cycle against a fresh depth image and feature map.
/// Remembered returns tighten the departure ball so that it cannot reach
/// obstacles that have left the field of view; keyframe pyramids extend
/// coverage.
ReplanResult replan(const CommittedPlan& committed, double now, const TrajectoryState& state,
                    const DepthImage& depth, const FeatureMap& features,
                    const PlannerConfig& config, const SensorRig& rig, std::mt19937_64& rng,
                    const ObstacleMemory& memory = {});

}  // namespace pap
