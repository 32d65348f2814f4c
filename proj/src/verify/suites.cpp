#include "pap/verify/suites.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "pap/perception_cost.hpp"
#include "pap/planner.hpp"
#include "pap/pyramid_collision.hpp"
#include "pap/sim/world.hpp"
#include "pap/trajectory.hpp"
#include "pap/verify/oracles.hpp"

namespace pap::verify {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(4) << v;
  return os.str();
}

Vec3 uniform_vec(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  const double x = d(rng);
  const double y = d(rng);
  const double z = d(rng);
  return {x, y, z};
}

Mat3 rotation_about(const Vec3& w) {
  const double a = w.norm();
  if (a == 0.0) return Mat3::Identity();
  return Eigen::AngleAxisd(a, w / a).toRotationMatrix();
}

}  // namespace

bool SuiteReport::pass() const {
  return std::all_of(cases.begin(), cases.end(), [](const CaseReport& c) { return c.pass(); });
}

const CaseReport* SuiteReport::worst() const {
  const CaseReport* w = nullptr;
  double ratio = -1.0;
  for (const auto& c : cases) {
    const double r = c.value / c.tolerance;
    if (r > ratio) {
      ratio = r;
      w = &c;
    }
  }
  return w;
}

void SuiteReport::print(std::ostream& os) const {
  for (const auto& c : cases) {
    os << (c.pass() ? "  ok    " : "  FAIL  ") << c.name << ": " << fmt(c.value) << " (tol "
       << fmt(c.tolerance) << ")\n";
  }
  for (const auto& n : notes) os << "  note  " << n << '\n';
  os << suite << ": " << (pass() ? "PASS" : "FAIL") << " in " << fmt(seconds) << " s\n";
  if (!pass()) {
    const CaseReport* w = worst();
    os << "worst: " << w->name << " = " << fmt(w->value) << '\n';
  }
}

SuiteReport jacobian_suite(int points, std::uint64_t seed, JacobianFn jacobian) {
  const auto t0 = Clock::now();
  if (!jacobian) jacobian = [](const Vec3& p, const CameraIntrinsics& K) { return pose_jacobian(p, K); };
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> f(100.0, 800.0);
  std::uniform_real_distribution<double> cx(100.0, 400.0);
  std::uniform_real_distribution<double> depth(0.5, 10.0);
  std::uniform_real_distribution<double> lateral(-1.0, 1.0);

  double worst = 0.0;
  for (int i = 0; i < points; ++i) {
    CameraIntrinsics K;
    K.fx = f(rng);
    K.fy = f(rng);
    K.cx = cx(rng);
    K.cy = cx(rng);
    const double z = depth(rng);
    const Vec3 p(z * lateral(rng), z * lateral(rng), z);
    const Mat26 J = jacobian(p, K);
    const Mat26 Jn = numeric_pose_jacobian(p, K);
    worst = std::max(worst, (J - Jn).norm() / Jn.norm());
  }
  SuiteReport r;
  r.suite = "jacobian";
  r.cases.push_back({"max relative error over " + std::to_string(points) + " points", worst, 1e-5});
  r.seconds = seconds_since(t0);
  return r;
}

namespace {

struct CovarianceCase {
  double rel_error = 0.0;
  double predicted_trace = 0.0;
};

CovarianceCase covariance_case(double t_exp, int trials, std::uint64_t seed) {
  CameraIntrinsics K;
  K.t_exp = t_exp;
  PerceptionParams params;
  const RigidTransform T_bc = forward_camera_mount();
  const RigidTransform T_wb;  // identity body pose at t = 0
  const RigidTransform T_wc = compose(T_wb, T_bc);
  const Vec3 v_wb(1.0, 2.0, 0.5);
  const Vec3 omega(0.5, 0.8, 3.0);

  std::vector<Vec3> pts;
  for (double x : {-1.5, -0.5, 0.5, 1.5}) {
    for (double y : {-0.75, 0.75}) pts.emplace_back(x, y, 4.0);
  }

  // Library prediction.
  std::vector<FeatureProjection> proj;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const Vec3 pdot = feature_camera_velocity(pts[k], v_wb, omega,
                                              T_wc.inverse().rotation(), T_bc);
    const Vec2 bdot = feature_image_velocity(pts[k], pdot, K);
    proj.push_back({static_cast<int>(k), pts[k], project(K, pts[k]), bdot,
                    feature_covariance(bdot, K.t_exp, params.sigma_n)});
  }
  const PoseCovarianceResult pred = pose_covariance(proj, K, params);
  const Mat3 predicted = pred.covariance.sigma.topLeftCorner<3, 3>();

  // Monte Carlo with image motion from differencing the moving camera.
  std::vector<Vec3> world;
  for (const auto& p : pts) world.push_back(T_wc.apply(p));
  auto image_at = [&](std::size_t k, double t) {
    const RigidTransform body(rotation_about(omega * t), v_wb * t);
    const RigidTransform cam = compose(body, T_bc);
    const Vec3 pc = cam.inverse().apply(world[k]);
    return Vec3(pinhole_reference(pc, K).x(), pinhole_reference(pc, K).y(), 0.0);
  };

  std::vector<Vec2> bdots;
  std::vector<Mat2> weights;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const Vec3 d = numeric_derivative([&](double t) { return image_at(k, t); }, 0.0, 1e-4);
    const Vec2 bdot = d.head<2>();
    const double len = K.t_exp * bdot.norm();
    Mat2 cov = params.sigma_n * params.sigma_n * Mat2::Identity();
    if (len > 0.0) {
      const Vec2 u = bdot.normalized();
      cov += len * len / 12.0 * u * u.transpose();
    }
    bdots.push_back(bdot);
    weights.push_back(cov.inverse());
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> streak(-0.5, 0.5);
  std::vector<Vec3> samples;
  samples.reserve(static_cast<std::size_t>(trials));
  std::vector<Vec2> obs(pts.size());
  for (int i = 0; i < trials; ++i) {
    for (std::size_t k = 0; k < pts.size(); ++k) {
      const double gx = gauss(rng);
      const double gy = gauss(rng);
      Vec2 noise = params.sigma_n * Vec2(gx, gy);
      noise += streak(rng) * K.t_exp * bdots[k];
      obs[k] = pinhole_reference(pts[k], K) + noise;
    }
    samples.push_back(gauss_newton_pose(pts, obs, weights, K, 3).head<3>());
  }
  Vec3 mean = Vec3::Zero();
  for (const auto& s : samples) mean += s;
  mean /= trials;
  Mat3 empirical = Mat3::Zero();
  for (const auto& s : samples) empirical += (s - mean) * (s - mean).transpose();
  empirical /= (trials - 1);

  return {(predicted - empirical).norm() / empirical.norm(), predicted.trace()};
}

}  // namespace

SuiteReport covariance_suite(int trials, std::uint64_t seed) {
  const auto t0 = Clock::now();
  SuiteReport r;
  r.suite = "covariance";
  const CovarianceCase sharp = covariance_case(0.0, trials, seed);
  const CovarianceCase blurred = covariance_case(0.008, trials, seed + 1);
  r.cases.push_back({"no blur: relative Frobenius error", sharp.rel_error, 0.15});
  r.cases.push_back({"t_exp 8 ms: relative Frobenius error", blurred.rel_error, 0.15});
  r.notes.push_back("predicted translational trace: " + fmt(sharp.predicted_trace) +
                    " m^2 (no blur), " + fmt(blurred.predicted_trace) + " m^2 (8 ms)");
  r.seconds = seconds_since(t0);
  return r;
}

namespace {

sim::World random_scene(std::mt19937_64& rng, const RigidTransform& T_wc) {
  std::uniform_int_distribution<int> count(1, 10);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  sim::World w;
  const int n = count(rng);
  const Vec3 c = T_wc.translation();
  while (static_cast<int>(w.spheres.size() + w.boxes.size()) < n) {
    Vec3 center;
    if (unit(rng) < 0.7) {
      // In front of the camera.
      const Vec3 dir(2.0 * unit(rng) - 1.0, 1.6 * unit(rng) - 0.8, 1.0);
      center = T_wc.apply(dir * (1.0 + 8.0 * unit(rng)));
    } else {
      center = c + uniform_vec(rng, -8.0, 8.0);
    }
    const bool sphere = unit(rng) < 0.5;
    if (sphere) {
      sim::Sphere s{center, 0.2 + 1.3 * unit(rng)};
      if ((s.center - c).norm() - s.radius < 0.7) continue;
      w.spheres.push_back(s);
    } else {
      const Vec3 half = uniform_vec(rng, 0.1, 1.5);
      sim::Box b{center - half, center + half};
      sim::World probe;
      probe.boxes.push_back(b);
      if (sim::obstacle_distance(probe, c) < 0.7) continue;
      w.boxes.push_back(b);
    }
  }
  // Enclosing room so that every pixel sees a return.
  const double half = 6.0 + 8.0 * unit(rng);
  for (int axis = 0; axis < 3; ++axis) {
    for (double side : {-1.0, 1.0}) {
      Vec3 lo = c - Vec3::Constant(half + 0.5);
      Vec3 hi = c + Vec3::Constant(half + 0.5);
      if (side < 0.0) {
        hi[axis] = c[axis] - half;
      } else {
        lo[axis] = c[axis] + half;
      }
      w.boxes.push_back({lo, hi});
    }
  }
  return w;
}

}  // namespace

SuiteReport collision_suite(int scenes, int candidates, std::uint64_t seed) {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const CameraIntrinsics K;
  PlannerConfig cfg;
  cfg.candidates = candidates;
  const CollisionConfig& cc = cfg.collision;
  const RigidTransform T_bc = forward_camera_mount();

  long accepted = 0;
  long rejected = 0;
  long false_accepts = 0;
  double min_margin = std::numeric_limits<double>::infinity();
  for (int s = 0; s < scenes; ++s) {
    const double yaw = 2.0 * std::numbers::pi * unit(rng);
    const double pitch = 0.3 * (unit(rng) - 0.5);
    const Mat3 R = rotation_about(Vec3(0, 0, yaw)) * rotation_about(Vec3(0, pitch, 0));
    const RigidTransform T_wb(R, uniform_vec(rng, -2.0, 2.0));
    const RigidTransform T_wc = compose(T_wb, T_bc);
    const sim::World world = random_scene(rng, T_wc);
    const DepthImage depth = sim::render_depth(world, T_wc, K);

    TrajectoryState start = TrajectoryState::at_rest(T_wb.translation());
    start.velocity = R * Vec3(2.0 * unit(rng), 1.0 * (unit(rng) - 0.5), 0.5 * (unit(rng) - 0.5));
    start.acceleration = uniform_vec(rng, -1.5, 1.5);
    const Vec3 goal = T_wc.apply(Vec3(0, 0, 20));

    PyramidStore store(depth, cc);
    const PointCloudOracle cloud(depth, 2.0 * cc.vehicle_radius);
    const auto trajs = sample_candidates(start, depth, cfg, rng, goal, yaw);
    for (const auto& traj : trajs) {
      if (!collision_free(traj, store).collision_free) {
        ++rejected;
        continue;
      }
      ++accepted;
      const int n = static_cast<int>(std::ceil(traj.duration() / 2e-3));
      bool violated = false;
      for (int k = 0; k <= n && !violated; ++k) {
        const Vec3 p = traj.position(traj.duration() * k / n);
        const double d = cloud.nearest(p, 2.0 * cc.vehicle_radius);
        double margin = d - cc.vehicle_radius;
        if (!in_frustum(depth, p)) {
          const double reach = (cc.unseen_margin - cc.vehicle_radius) - (p - T_wc.translation()).norm();
          margin = std::min(margin, reach);
        }
        min_margin = std::min(min_margin, margin);
        violated = margin < 0.0;
      }
      if (violated) ++false_accepts;
    }
  }
  SuiteReport r;
  r.suite = "collision";
  r.cases.push_back({"false accepts over " + std::to_string(scenes) + " scenes",
                     static_cast<double>(false_accepts), 1.0});
  const long total = accepted + rejected;
  r.notes.push_back("accepted " + std::to_string(accepted) + " of " + std::to_string(total) +
                    " candidates; conservative rejection rate " +
                    fmt(total > 0 ? static_cast<double>(rejected) / total : 0.0));
  r.notes.push_back("smallest oracle margin on accepted trajectories: " + fmt(min_margin) + " m");
  r.seconds = seconds_since(t0);
  return r;
}

SuiteReport trajectory_suite(int draws, std::uint64_t seed) {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dur(0.5, 5.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  constexpr double h = 1e-3;

  double pos_err = 0.0, vel_err = 0.0, acc_err = 0.0, start_err = 0.0;
  double deriv_err = 0.0, rate_err = 0.0;
  int rate_checks = 0;
  for (int i = 0; i < draws; ++i) {
    TrajectoryState s;
    s.position = uniform_vec(rng, -5.0, 5.0);
    s.velocity = uniform_vec(rng, -3.0, 3.0);
    s.acceleration = uniform_vec(rng, -5.0, 5.0);
    const Vec3 end = s.position + uniform_vec(rng, -8.0, 8.0);
    const double T = dur(rng);
    const Vec3 goal = s.position + Vec3(100.0, 60.0, 0.0);
    const QuinticTrajectory traj = solve_min_jerk(s, end, T, goal, 0.0);

    const TrajectoryState e = traj.evaluate(T);
    pos_err = std::max(pos_err, (e.position - end).norm());
    vel_err = std::max(vel_err, e.velocity.norm());
    acc_err = std::max(acc_err, e.acceleration.norm());
    const TrajectoryState b = traj.evaluate(0.0);
    start_err = std::max({start_err, (b.position - s.position).norm(),
                          (b.velocity - s.velocity).norm(),
                          (b.acceleration - s.acceleration).norm()});

    const double t = 4 * h + (T - 8 * h) * unit(rng);
    auto rel = [](const Vec3& a, const Vec3& n) { return (a - n).norm() / std::max(a.norm(), 1.0); };
    deriv_err = std::max(
        {deriv_err,
         rel(traj.velocity(t), numeric_derivative([&](double x) { return traj.position(x); }, t, h)),
         rel(traj.acceleration(t),
             numeric_derivative([&](double x) { return traj.velocity(x); }, t, h)),
         rel(traj.jerk(t), numeric_derivative([&](double x) { return traj.acceleration(x); }, t, h))});

    // Body rates against differenced attitudes, restricted to flyable states
    // (well-defined thrust, rates within a few times the usual limit).
    const Vec3 g = kDefaultGravity;
    constexpr double hr = 2e-4;
    bool well_posed = true;
    for (double x : {t - 2 * hr, t, t + 2 * hr}) well_posed &= (traj.acceleration(x) - g).norm() > 2.0;
    if (!well_posed) continue;
    const FlatState fs = flat_state_at(traj, t);
    if (fs.body_rate.norm() > 20.0) continue;
    auto R = [&](double x) { return flat_state_at(traj, x).pose.rotation(); };
    const Mat3 Rdot = (8.0 * (R(t + hr) - R(t - hr)) - (R(t + 2 * hr) - R(t - 2 * hr))) / (12.0 * hr);
    const Mat3 W = fs.pose.rotation().transpose() * Rdot;
    const Vec3 w_fd(W(2, 1), W(0, 2), W(1, 0));
    rate_err = std::max(rate_err, rel(fs.body_rate, w_fd));
    ++rate_checks;
  }
  SuiteReport r;
  r.suite = "trajectory";
  r.cases.push_back({"terminal position error (m)", pos_err, 1e-9});
  r.cases.push_back({"terminal velocity norm (m/s)", vel_err, 1e-9});
  r.cases.push_back({"terminal acceleration norm (m/s^2)", acc_err, 1e-9});
  r.cases.push_back({"initial state error", start_err, 1e-9});
  r.cases.push_back({"derivative vs finite difference (rel)", deriv_err, 1e-6});
  r.cases.push_back({"body rate vs attitude difference (rel)", rate_err, 1e-5});
  r.notes.push_back(std::to_string(draws) + " draws, " + std::to_string(rate_checks) +
                    " body-rate checks");
  r.seconds = seconds_since(t0);
  return r;
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"jacobian", "covariance", "collision", "trajectory"};
  return names;
}

SuiteReport run_suite(const std::string& name, std::uint64_t seed) {
  if (name == "jacobian") return jacobian_suite(1000, seed);
  if (name == "covariance") return covariance_suite(10000, seed);
  if (name == "collision") return collision_suite(500, 20, seed);
  if (name == "trajectory") return trajectory_suite(10000, seed);
  throw std::invalid_argument("unknown suite '" + name + "'");
}

}  // namespace pap::verify
