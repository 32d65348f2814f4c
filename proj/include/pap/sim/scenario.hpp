#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "pap/planner.hpp"
#include "pap/sim/world.hpp"

namespace pap::sim {

struct RunConfig {
  Vec3 start = Vec3::Zero();
  double dt = 1.0 / 60.0;   // s
  int replan_every = 4;     // steps per depth frame
  double time_limit = 60.0; // simulated s
  std::uint64_t seed = 1;
  // Keyframe pyramids and remembered depth returns near the vehicle. Without
  // them the departure ball may reach obstacles outside the field of view.
  bool obstacle_memory = true;

  void validate() const;
};

struct Scenario {
  std::string name;
  World world;
  SensorRig rig;
  PlannerConfig planner;
  RunConfig run;
};

/// Parse or validation failure; `line` is 1-based, 0 when unknown.
class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(const std::string& msg, int line);
  int line() const { return line_; }

 private:
  int line_;
};

/// YAML scenario with sections world, camera, planner and run. Unknown keys
/// are rejected.
Scenario parse_scenario(const std::string& text, const std::string& name = "scenario");
Scenario load_scenario(const std::string& path);

}  // namespace pap::sim
