#include "pap/sim/simulator.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include <json.hpp>

namespace pap::sim {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr int kClearanceSubsteps = 8;
constexpr double kRestTolerance = 1e-9;
constexpr double kMemoryVoxel = 0.1;
constexpr double kMemoryReach = 1.0;  // kept beyond l from the camera
constexpr std::size_t kMaxKeyframes = 8;
constexpr double kKeyframeSpacing = 0.5;
constexpr double kKeyframeTurn = 0.15;

std::uint64_t voxel_key(const Vec3& p) {
  const auto cell = [](double x) {
    return static_cast<std::uint64_t>(static_cast<std::int64_t>(std::floor(x / kMemoryVoxel)) +
                                      (1 << 20)) &
           0x1fffff;
  };
  return cell(p.x()) | (cell(p.y()) << 21) | (cell(p.z()) << 42);
}

Vec3 voxel_center(std::uint64_t key) {
  Vec3 c;
  for (int i = 0; i < 3; ++i) {
    const auto cell = static_cast<std::int64_t>((key >> (21 * i)) & 0x1fffff) - (1 << 20);
    c[i] = (static_cast<double>(cell) + 0.5) * kMemoryVoxel;
  }
  return c;
}

// Adds this frame's returns to the memory, forgets voxels that are out of
// reach and returns the remembered voxel centers.
std::vector<Vec3> remember_returns(SimState& sim, const DepthImage& depth, double reach) {
  const CameraIntrinsics& K = depth.intrinsics();
  const RigidTransform& T_wc = depth.capture_pose();
  for (int v = 0; v < K.height; ++v) {
    for (int u = 0; u < K.width; ++u) {
      const float z = depth.at(u, v);
      if (std::isnan(z)) continue;
      const Vec3 p_c((u + 0.5 - K.cx) / K.fx * z, (v + 0.5 - K.cy) / K.fy * z, z);
      sim.return_memory.insert(voxel_key(T_wc.apply(p_c)));
    }
  }
  const Vec3 c = T_wc.translation();
  std::erase_if(sim.return_memory,
                [&](std::uint64_t key) { return (voxel_center(key) - c).norm() > reach; });
  std::vector<Vec3> points;
  points.reserve(sim.return_memory.size());
  for (std::uint64_t key : sim.return_memory) points.push_back(voxel_center(key));
  return points;
}

void add_keyframe(SimState& sim, std::shared_ptr<PyramidStore> store) {
  if (!sim.keyframes.empty()) {
    const RigidTransform& last = sim.keyframes.front()->depth().capture_pose();
    const RigidTransform& now = store->depth().capture_pose();
    const double moved = (now.translation() - last.translation()).norm();
    const double turned = Eigen::AngleAxisd(last.rotation().transpose() * now.rotation()).angle();
    if (moved < kKeyframeSpacing && turned < kKeyframeTurn) return;
  }
  sim.keyframes.insert(sim.keyframes.begin(), std::move(store));
  if (sim.keyframes.size() > kMaxKeyframes) sim.keyframes.pop_back();
}

RigidTransform camera_in_world(const FlatState& fs, const SensorRig& rig) {
  return compose(fs.pose, rig.body_to_camera);
}

FlatState vehicle_flat_state(const SimState& sim, const Scenario& sc) {
  return flat_state_at(sim.plan.trajectory, sim.plan.local_time(sim.time),
                       sc.planner.limits.gravity);
}

bool ends_at_rest(const QuinticTrajectory& traj) {
  const TrajectoryState end = traj.evaluate(traj.duration());
  return end.velocity.norm() < kRestTolerance && end.acceleration.norm() < kRestTolerance;
}

}  // namespace

const char* to_string(Termination t) {
  switch (t) {
    case Termination::kRunning:
      return "running";
    case Termination::kGoalReached:
      return "goal_reached";
    case Termination::kSafeStop:
      return "safe_stop";
    case Termination::kTimeLimit:
      return "time_limit";
  }
  return "unknown";
}

SimState initial_state(const Scenario& sc, std::uint64_t seed) {
  const Vec3& start = sc.run.start;
  const double yaw = heading_to(sc.world.goal, start, 0.0);
  SimState sim{
      .vehicle = TrajectoryState::at_rest(start),
      .yaw = yaw,
      .plan = CommittedPlan::hover(start, 0.0, sc.planner.min_duration, sc.world.goal, yaw),
      .plan_c_perc = std::numeric_limits<double>::infinity(),
      .plan_c_speed = 0.0,
      .discovered = FeatureMap(),
      .log = {},
      .rng = std::mt19937_64(seed),
      .status = Termination::kRunning,
      .return_memory = {},
      .keyframes = {},
  };
  sim.min_clearance = obstacle_distance(sc.world, start) - sc.planner.collision.vehicle_radius;
  return sim;
}

void step(SimState& sim, const Scenario& sc) {
  if (sim.status != Termination::kRunning) return;
  const SensorRig& rig = sc.rig;
  const CameraIntrinsics& K = rig.intrinsics;

  FlatState fs = vehicle_flat_state(sim, sc);
  const RigidTransform T_wc = camera_in_world(fs, rig);
  bool replanned = false;

  if (sim.step % sc.run.replan_every == 0) {
    const DepthImage depth = render_depth(sc.world, T_wc, K);
    discover_features(sc.world, T_wc, K, sim.discovered);
    std::vector<Vec3> remembered;
    ObstacleMemory memory;
    if (sc.run.obstacle_memory) {
      remembered = remember_returns(sim, depth, sc.planner.collision.unseen_margin + kMemoryReach);
      memory = {{remembered, 0.5 * std::sqrt(3.0) * kMemoryVoxel}, sim.keyframes};
    }
    ReplanResult res = replan(sim.plan, sim.time, sim.vehicle, depth, sim.discovered,
                              sc.planner, rig, sim.rng, memory);
    if (sc.run.obstacle_memory) add_keyframe(sim, res.store);
    ++sim.replans;
    sim.replan_time_total += res.elapsed;
    if (res.replaced) {
      ++sim.commits;
      if (!ends_at_rest(res.plan.trajectory)) ++sim.commits_not_at_rest;
      if (!res.best->valid()) ++sim.invalid_commits;
      sim.plan_c_perc = res.best->c_perc;
      sim.plan_c_speed = res.best->c_speed;
      replanned = true;
    } else if (res.plan.start_time != sim.plan.start_time) {
      // Exhausted plan replaced by a hover at the terminal state.
      sim.plan_c_perc = res.incumbent->c_perc;
      sim.plan_c_speed = res.incumbent->c_speed;
    }
    sim.plan = res.plan;
    if (res.safe_stop) sim.status = Termination::kSafeStop;
    fs = vehicle_flat_state(sim, sc);
  }

  StepRecord rec;
  rec.t = sim.time;
  rec.position = sim.vehicle.position;
  rec.yaw = fs.yaw;
  rec.speed = sim.vehicle.velocity.norm();
  rec.omega_norm = fs.body_rate.norm();
  rec.n_features_visible = count_visible_features(sc.world, T_wc, K);
  const PoseCovarianceResult cov =
      pose_uncertainty(fs, sim.discovered, rig.body_to_camera, K, sc.planner.perception);
  rec.pos_std = cov.ok() ? cov.covariance.mean_position_std() : kNaN;
  rec.c_perc = sim.plan_c_perc;
  rec.c_speed = sim.plan_c_speed;
  rec.c_tot = sim.plan.c_tot;
  rec.replanned = replanned;
  sim.log.push_back(rec);
  sim.yaw = fs.yaw;

  if ((sim.vehicle.position - sc.world.goal).norm() < sc.planner.goal_tolerance) {
    sim.status = Termination::kGoalReached;
  }
  if (sim.status != Termination::kRunning) return;

  const double t_next = static_cast<double>(sim.step + 1) * sc.run.dt;
  for (int k = 1; k <= kClearanceSubsteps; ++k) {
    const double t = sim.time + (t_next - sim.time) * k / kClearanceSubsteps;
    const double d = obstacle_distance(sc.world, sim.plan.state_at(t).position) -
                     sc.planner.collision.vehicle_radius;
    sim.min_clearance = std::min(sim.min_clearance, d);
  }
  sim.vehicle = sim.plan.state_at(t_next);
  sim.time = t_next;
  ++sim.step;
  if (sim.time >= sc.run.time_limit) sim.status = Termination::kTimeLimit;
}

RunResult run_scenario(const Scenario& sc, std::optional<std::uint64_t> seed) {
  const std::uint64_t s = seed.value_or(sc.run.seed);
  SimState sim = initial_state(sc, s);
  while (sim.status == Termination::kRunning) step(sim, sc);

  RunSummary sum;
  sum.scenario = sc.name;
  sum.seed = s;
  sum.k_perc = sc.planner.k_perc;
  sum.t_exp = sc.rig.intrinsics.t_exp;
  sum.termination = sim.status;
  sum.sim_time = sim.time;
  sum.steps = static_cast<long>(sim.log.size());
  double pos_std_total = 0.0;
  for (const auto& r : sim.log) {
    sum.mean_speed += r.speed;
    sum.mean_omega += r.omega_norm;
    sum.mean_features += r.n_features_visible;
    if (std::isfinite(r.pos_std)) {
      pos_std_total += r.pos_std;
      ++sum.pos_std_samples;
    }
  }
  if (!sim.log.empty()) {
    const double n = static_cast<double>(sim.log.size());
    sum.mean_speed /= n;
    sum.mean_omega /= n;
    sum.mean_features /= n;
  }
  sum.mean_pos_std = sum.pos_std_samples > 0 ? pos_std_total / sum.pos_std_samples : kNaN;
  sum.distance_to_goal = (sim.vehicle.position - sc.world.goal).norm();
  sum.replans = sim.replans;
  sum.commits = sim.commits;
  sum.commits_not_at_rest = sim.commits_not_at_rest;
  sum.invalid_commits = sim.invalid_commits;
  sum.min_clearance = sim.min_clearance;
  sum.safe = sim.min_clearance >= 0.0;
  sum.mean_replan_ms = sim.replans > 0 ? 1e3 * sim.replan_time_total / sim.replans : 0.0;
  return {sum, std::move(sim.log)};
}

void write_log_csv(std::ostream& os, const std::vector<StepRecord>& log) {
  os << "t,x,y,z,yaw,speed,omega_norm,n_features_visible,pos_std,c_perc,c_speed,c_tot,replanned\n";
  char buf[512];
  for (const auto& r : log) {
    std::snprintf(buf, sizeof(buf), "%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%d,%.6g,%.6g,%.6g,%.6g,%d\n",
                  r.t, r.position.x(), r.position.y(), r.position.z(), r.yaw, r.speed,
                  r.omega_norm, r.n_features_visible, r.pos_std, r.c_perc, r.c_speed, r.c_tot,
                  r.replanned ? 1 : 0);
    os << buf;
  }
}

void write_summary_json(std::ostream& os, const RunSummary& s) {
  nlohmann::ordered_json j;
  j["scenario"] = s.scenario;
  j["seed"] = s.seed;
  j["k_perc"] = s.k_perc;
  j["t_exp"] = s.t_exp;
  j["termination"] = to_string(s.termination);
  j["sim_time"] = s.sim_time;
  j["steps"] = s.steps;
  j["mean_angular_velocity"] = s.mean_omega;
  j["mean_features_in_fov"] = s.mean_features;
  j["mean_speed"] = s.mean_speed;
  j["mean_position_std"] = s.mean_pos_std;
  j["position_std_samples"] = s.pos_std_samples;
  j["distance_to_goal"] = s.distance_to_goal;
  j["replans"] = s.replans;
  j["commits"] = s.commits;
  j["commits_not_at_rest"] = s.commits_not_at_rest;
  j["invalid_commits"] = s.invalid_commits;
  j["min_clearance"] = s.min_clearance;
  j["safe"] = s.safe;
  os << j.dump(2) << '\n';
}

}  // namespace pap::sim
