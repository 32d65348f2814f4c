#include "pap/planner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace pap {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Remaining segments shorter than this are treated as finished.
constexpr double kMinRemaining = 1e-3;

}  // namespace

void PlannerConfig::validate() const {
  if (!(k_perc >= 0.0) || !std::isfinite(k_perc)) {
    throw std::invalid_argument("planner: k_perc must be finite and >= 0");
  }
  if (candidates <= 0) throw std::invalid_argument("planner: candidate budget must be positive");
  if (!(min_duration > 0.0) || !(max_duration >= min_duration) || !std::isfinite(max_duration)) {
    throw std::invalid_argument("planner: need 0 < T_min <= T_max");
  }
  if (!(min_sample_depth > 0.0)) {
    throw std::invalid_argument("planner: sampling depth must be positive");
  }
  if (!(cycle_budget > 0.0)) throw std::invalid_argument("planner: cycle budget must be positive");
  if (!(goal_tolerance > 0.0)) throw std::invalid_argument("planner: goal tolerance must be positive");
  limits.validate();
  collision.validate();
  perception.validate();
}

CommittedPlan CommittedPlan::hover(const Vec3& p, double now, double duration, const Vec3& goal,
                                   double yaw) {
  return CommittedPlan{hover_trajectory(p, duration, goal, yaw), now, kInf, goal};
}

double CommittedPlan::local_time(double now) const {
  return std::clamp(now - start_time, 0.0, trajectory.duration());
}

TrajectoryState CommittedPlan::state_at(double now) const {
  return trajectory.evaluate(local_time(now));
}

double CommittedPlan::yaw_at(double now) const { return trajectory.yaw_at(local_time(now)); }

double speed_cost(const QuinticTrajectory& traj, const Vec3& goal) {
  const double T = traj.duration();
  const double d0 = (goal - traj.start().position).norm();
  const double d1 = (goal - traj.end_position()).norm();
  return -(d0 - d1) / T;
}

std::vector<QuinticTrajectory> sample_candidates(const TrajectoryState& state,
                                                 const DepthImage& depth,
                                                 const PlannerConfig& config, std::mt19937_64& rng,
                                                 const Vec3& goal, double hold_yaw) {
  const CameraIntrinsics& K = depth.intrinsics();
  const double d_hi = std::min(config.collision.unseen_margin, K.d_max);
  const double d_lo = std::min(config.min_sample_depth, d_hi);
  std::uniform_real_distribution<double> u_dist(0.0, K.width);
  std::uniform_real_distribution<double> v_dist(0.0, K.height);
  std::uniform_real_distribution<double> d_dist(d_lo, d_hi);
  std::uniform_real_distribution<double> T_dist(config.min_duration, config.max_duration);

  std::vector<QuinticTrajectory> out;
  out.reserve(static_cast<std::size_t>(config.candidates));
  for (int i = 0; i < config.candidates; ++i) {
    const PixelCoord b{u_dist(rng), v_dist(rng)};
    const double d = d_dist(rng);
    const double T = T_dist(rng);
    const Vec3 end = depth.capture_pose().apply(unproject(K, b, d));
    out.push_back(solve_min_jerk(state, end, T, goal, hold_yaw));
  }
  return out;
}

CandidateEvaluation evaluate_candidate(const QuinticTrajectory& traj, const Vec3& goal,
                                       const FeatureMap& features, PyramidStore& store,
                                       const PlannerConfig& config, const SensorRig& rig) {
  CandidateEvaluation e{traj};
  e.c_speed = speed_cost(traj, goal);
  e.c_tot = kInf;
  e.c_perc = kInf;

  e.input_feasible = check_feasibility(traj, config.limits).feasible;
  if (!e.input_feasible) return e;

  e.collision_free = collision_free(traj, store).collision_free;
  if (!e.collision_free) return e;

  if (config.k_perc == 0.0) {
    e.c_perc = 0.0;
    e.perception_valid = true;
  } else {
    e.c_perc = perception_cost(traj, features, rig.body_to_camera, rig.intrinsics,
                               config.perception, config.limits.gravity);
    e.perception_valid = std::isfinite(e.c_perc);
    if (!e.perception_valid) return e;
  }
  e.c_tot = config.k_perc * e.c_perc + e.c_speed;
  return e;
}

ReplanResult replan(const CommittedPlan& committed, double now, const TrajectoryState& state,
                    const DepthImage& depth, const FeatureMap& features,
                    const PlannerConfig& config, const SensorRig& rig, std::mt19937_64& rng,
                    const ObstacleMemory& memory) {
  const auto t_start = std::chrono::steady_clock::now();
  const Vec3& goal = committed.goal;
  const double yaw = committed.yaw_at(now);
  const bool ended = now - committed.start_time >= committed.trajectory.duration() - kMinRemaining;

  auto shared_store = std::make_shared<PyramidStore>(depth, config.collision, memory.returns);
  shared_store->set_keyframes(memory.keyframes);
  PyramidStore& store = *shared_store;

  // Candidates are drawn up front so that RNG consumption does not depend on
  // how many of them get evaluated.
  const auto candidates = sample_candidates(state, depth, config, rng, goal, yaw);

  ReplanResult result{committed, false, false, 0, 0, std::nullopt, std::nullopt, 0, 0.0, nullptr};
  const double remaining = committed.trajectory.duration() - (now - committed.start_time);
  const QuinticTrajectory rest =
      ended ? hover_trajectory(state.position, config.min_duration, goal, yaw)
            : solve_min_jerk(state, committed.trajectory.end_position(), remaining, goal,
                             committed.trajectory.hold_yaw());
  result.incumbent = evaluate_candidate(rest, goal, features, store, config, rig);

  double best_cost = kInf;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (config.enforce_cycle_budget) {
      const std::chrono::duration<double> el = std::chrono::steady_clock::now() - t_start;
      if (el.count() > config.cycle_budget) break;
    }
    CandidateEvaluation e = evaluate_candidate(candidates[i], goal, features, store, config, rig);
    ++result.evaluated;
    if (!e.valid()) continue;
    ++result.valid;
    if (e.c_tot < best_cost) {
      best_cost = e.c_tot;
      result.best = std::move(e);
    }
  }

  if (result.best && best_cost < result.incumbent->c_tot) {
    result.plan = CommittedPlan{result.best->trajectory, now, best_cost, goal};
    result.replaced = true;
  } else if (ended) {
    if (result.incumbent->valid()) {
      result.plan = CommittedPlan{rest, now, result.incumbent->c_tot, goal};
    } else {
      result.plan = CommittedPlan::hover(state.position, now, config.min_duration, goal, yaw);
    }
    result.safe_stop = result.valid == 0;
  }

  result.pyramids_generated = store.size();
  store.set_keyframes({});
  result.store = std::move(shared_store);
  result.elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return result;
}

}  // namespace pap
