#include "pap/sim/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

namespace pap::sim {

namespace {

int line_of(const YAML::Node& n) { return n.Mark().line >= 0 ? n.Mark().line + 1 : 0; }

[[noreturn]] void fail(const YAML::Node& n, const std::string& msg) {
  throw ScenarioError(msg, line_of(n));
}

void require_map(const YAML::Node& n, const std::string& what) {
  if (!n.IsMap()) fail(n, what + " must be a mapping");
}

void check_keys(const YAML::Node& n, const std::string& section,
                std::initializer_list<const char*> allowed) {
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& kv : n) {
    const auto key = kv.first.as<std::string>();
    if (!ok.count(key)) fail(kv.first, "unknown key '" + key + "' in " + section);
  }
}

template <typename T>
void read(const YAML::Node& parent, const char* key, T& out) {
  const YAML::Node n = parent[key];
  if (!n) return;
  try {
    out = n.as<T>();
  } catch (const YAML::Exception&) {
    fail(n, std::string("bad value for '") + key + "'");
  }
}

Vec3 as_vec3(const YAML::Node& n, const std::string& key) {
  if (!n.IsSequence() || n.size() != 3) fail(n, "'" + key + "' must be a 3-element list");
  Vec3 v;
  for (std::size_t i = 0; i < 3; ++i) {
    try {
      v[static_cast<int>(i)] = n[i].as<double>();
    } catch (const YAML::Exception&) {
      fail(n[i], "'" + key + "' entries must be numbers");
    }
  }
  return v;
}

void read_vec3(const YAML::Node& parent, const char* key, Vec3& out) {
  const YAML::Node n = parent[key];
  if (n) out = as_vec3(n, key);
}

// Runs a validate() call, re-throwing its message with the section's line.
template <typename F>
void validated(const YAML::Node& n, const std::string& section, F&& f) {
  try {
    f();
  } catch (const std::invalid_argument& e) {
    fail(n, section + ": " + e.what());
  }
}

void parse_world(const YAML::Node& n, Scenario& sc) {
  require_map(n, "world");
  check_keys(n, "world", {"bounds", "spheres", "boxes", "features", "feature_seed"});
  World& w = sc.world;
  std::vector<SurfaceDensity> recipe;

  if (const auto b = n["bounds"]) {
    require_map(b, "world.bounds");
    check_keys(b, "world.bounds", {"min", "max"});
    read_vec3(b, "min", w.bounds.min);
    read_vec3(b, "max", w.bounds.max);
    if (!(w.bounds.min.array() < w.bounds.max.array()).all()) fail(b, "bounds: min must be < max");
  }
  if (const auto s = n["spheres"]) {
    if (!s.IsSequence()) fail(s, "spheres must be a list");
    for (const auto& e : s) {
      require_map(e, "sphere");
      check_keys(e, "sphere", {"center", "radius", "feature_density"});
      if (!e["center"] || !e["radius"]) fail(e, "sphere needs center and radius");
      Sphere sp;
      read_vec3(e, "center", sp.center);
      read(e, "radius", sp.radius);
      if (!(sp.radius > 0.0)) fail(e, "sphere radius must be positive");
      double density = 0.0;
      read(e, "feature_density", density);
      if (density < 0.0) fail(e, "feature_density must be >= 0");
      recipe.push_back({true, w.spheres.size(), density});
      w.spheres.push_back(sp);
    }
  }
  if (const auto bs = n["boxes"]) {
    if (!bs.IsSequence()) fail(bs, "boxes must be a list");
    for (const auto& e : bs) {
      require_map(e, "box");
      check_keys(e, "box", {"min", "max", "feature_density"});
      if (!e["min"] || !e["max"]) fail(e, "box needs min and max");
      Box bx;
      read_vec3(e, "min", bx.min);
      read_vec3(e, "max", bx.max);
      if (!(bx.min.array() < bx.max.array()).all()) fail(e, "box min must be < max");
      double density = 0.0;
      read(e, "feature_density", density);
      if (density < 0.0) fail(e, "feature_density must be >= 0");
      recipe.push_back({false, w.boxes.size(), density});
      w.boxes.push_back(bx);
    }
  }
  int next_id = 0;
  if (const auto fs = n["features"]) {
    if (!fs.IsSequence()) fail(fs, "features must be a list of [x, y, z]");
    for (const auto& f : fs) w.features.add(next_id++, as_vec3(f, "features"));
  }
  std::uint64_t seed = 0;
  read(n, "feature_seed", seed);
  generate_surface_features(w, recipe, seed, next_id);
}

void parse_camera(const YAML::Node& n, Scenario& sc) {
  require_map(n, "camera");
  check_keys(n, "camera",
             {"width", "height", "fx", "fy", "cx", "cy", "t_exp", "d_min", "d_max", "mount_offset"});
  CameraIntrinsics& K = sc.rig.intrinsics;
  read(n, "width", K.width);
  read(n, "height", K.height);
  read(n, "fx", K.fx);
  read(n, "fy", K.fy);
  read(n, "cx", K.cx);
  read(n, "cy", K.cy);
  read(n, "t_exp", K.t_exp);
  read(n, "d_min", K.d_min);
  read(n, "d_max", K.d_max);
  Vec3 offset(0.1, 0.0, 0.0);
  read_vec3(n, "mount_offset", offset);
  sc.rig.body_to_camera = forward_camera_mount(offset);
  validated(n, "camera", [&] { K.validate(); });
}

void parse_planner(const YAML::Node& n, Scenario& sc) {
  require_map(n, "planner");
  check_keys(n, "planner",
             {"k_perc", "candidates", "min_duration", "max_duration", "min_sample_depth",
              "max_speed", "min_thrust_accel", "max_thrust_accel", "max_body_rate",
              "vehicle_radius", "unseen_margin", "max_pyramids", "sigma_n", "sample_interval",
              "min_features", "max_condition", "cycle_budget", "enforce_cycle_budget",
              "goal_tolerance"});
  PlannerConfig& p = sc.planner;
  read(n, "k_perc", p.k_perc);
  read(n, "candidates", p.candidates);
  read(n, "min_duration", p.min_duration);
  read(n, "max_duration", p.max_duration);
  read(n, "min_sample_depth", p.min_sample_depth);
  read(n, "max_speed", p.limits.max_speed);
  read(n, "min_thrust_accel", p.limits.min_thrust_accel);
  read(n, "max_thrust_accel", p.limits.max_thrust_accel);
  read(n, "max_body_rate", p.limits.max_body_rate);
  read(n, "vehicle_radius", p.collision.vehicle_radius);
  read(n, "unseen_margin", p.collision.unseen_margin);
  read(n, "max_pyramids", p.collision.max_pyramids);
  read(n, "sigma_n", p.perception.sigma_n);
  read(n, "sample_interval", p.perception.sample_interval);
  read(n, "min_features", p.perception.min_features);
  read(n, "max_condition", p.perception.max_condition);
  read(n, "cycle_budget", p.cycle_budget);
  read(n, "enforce_cycle_budget", p.enforce_cycle_budget);
  read(n, "goal_tolerance", p.goal_tolerance);
}

void parse_run(const YAML::Node& n, Scenario& sc) {
  require_map(n, "run");
  check_keys(n, "run", {"start", "goal", "dt", "replan_every", "time_limit", "seed", "obstacle_memory"});
  if (!n["start"] || !n["goal"]) fail(n, "run needs start and goal");
  read_vec3(n, "start", sc.run.start);
  read_vec3(n, "goal", sc.world.goal);
  read(n, "dt", sc.run.dt);
  read(n, "replan_every", sc.run.replan_every);
  read(n, "time_limit", sc.run.time_limit);
  read(n, "seed", sc.run.seed);
  read(n, "obstacle_memory", sc.run.obstacle_memory);
  validated(n, "run", [&] { sc.run.validate(); });
}

}  // namespace

void RunConfig::validate() const {
  if (!start.allFinite()) throw std::invalid_argument("start must be finite");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be positive");
  if (replan_every < 1) throw std::invalid_argument("replan_every must be >= 1");
  if (!(time_limit > 0.0)) throw std::invalid_argument("time_limit must be positive");
}

ScenarioError::ScenarioError(const std::string& msg, int line)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + msg : msg),
      line_(line) {}

Scenario parse_scenario(const std::string& text, const std::string& name) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ScenarioError(e.msg, e.mark.line >= 0 ? e.mark.line + 1 : 0);
  }
  if (!root.IsMap()) throw ScenarioError("scenario must be a mapping", line_of(root));
  check_keys(root, "scenario", {"world", "camera", "planner", "run"});
  for (const char* section : {"world", "run"}) {
    if (!root[section]) throw ScenarioError(std::string("missing section '") + section + "'", 0);
  }

  Scenario sc;
  sc.name = name;
  // Wall-clock cutoffs would make runs machine dependent.
  sc.planner.enforce_cycle_budget = false;
  if (root["camera"]) parse_camera(root["camera"], sc);
  if (root["planner"]) parse_planner(root["planner"], sc);
  parse_run(root["run"], sc);
  parse_world(root["world"], sc);
  validated(root["planner"] ? root["planner"] : root, "planner", [&] { sc.planner.validate(); });

  const YAML::Node run = root["run"];
  if (!sc.world.bounds.contains(sc.world.goal)) fail(run["goal"], "goal outside world bounds");
  if (!sc.world.bounds.contains(sc.run.start)) fail(run["start"], "start outside world bounds");
  if (obstacle_distance(sc.world, sc.run.start) < sc.planner.collision.vehicle_radius) {
    fail(run["start"], "start closer than the vehicle radius to an obstacle");
  }
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario file '" + path + "'", 0);
  std::stringstream ss;
  ss << in.rdbuf();
  std::string name = path;
  const auto slash = name.find_last_of('/');
  if (slash != std::string::npos) name = name.substr(slash + 1);
  const auto dot = name.rfind('.');
  if (dot != std::string::npos && dot > 0) name = name.substr(0, dot);
  return parse_scenario(ss.str(), name);
}

}  // namespace pap::sim
