#pragma once

#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <memory>
#include <unordered_set>
#include <vector>

#include "pap/planner.hpp"
#include "pap/sim/scenario.hpp"

namespace pap::sim {

struct StepRecord {
  double t = 0.0;
  Vec3 position = Vec3::Zero();
  double yaw = 0.0;
  double speed = 0.0;
  double omega_norm = 0.0;
  int n_features_visible = 0;
  double pos_std = 0.0;  // NaN when the current pose is not well constrained
  double c_perc = 0.0;
  double c_speed = 0.0;
  double c_tot = 0.0;
  bool replanned = false;
};

enum class Termination { kRunning, kGoalReached, kSafeStop, kTimeLimit };
const char* to_string(Termination t);

struct SimState {
  double time = 0.0;
  long step = 0;
  TrajectoryState vehicle;
  double yaw = 0.0;
  CommittedPlan plan;
  double plan_c_perc = 0.0;
  double plan_c_speed = 0.0;
  FeatureMap discovered;
  std::vector<StepRecord> log;
  std::mt19937_64 rng;
  Termination status = Termination::kRunning;
  // Voxelized depth returns near the vehicle, and stores of recent frames
  // captured from distinct poses (newest first).
  std::unordered_set<std::uint64_t> return_memory;
  std::vector<std::shared_ptr<PyramidStore>> keyframes;

  // Bookkeeping for the post-hoc checks.
  int replans = 0;
  int commits = 0;
  int commits_not_at_rest = 0;
  int invalid_commits = 0;
  double min_clearance = 0.0;  // obstacle distance minus vehicle radius
  double replan_time_total = 0.0;
};

SimState initial_state(const Scenario& sc, std::uint64_t seed);

/// Advances one step of length run.dt. Every run.replan_every steps a depth
/// frame is rendered, features are discovered and the planner runs. Sets
/// `status` when the run terminates.
void step(SimState& sim, const Scenario& sc);

struct RunSummary {
  std::string scenario;
  std::uint64_t seed = 0;
  double k_perc = 0.0;
  double t_exp = 0.0;
  Termination termination = Termination::kRunning;
  double sim_time = 0.0;
  long steps = 0;
  double mean_speed = 0.0;
  double mean_omega = 0.0;
  double mean_features = 0.0;
  double mean_pos_std = 0.0;  // over steps with a finite value
  int pos_std_samples = 0;
  double distance_to_goal = 0.0;
  int replans = 0;
  int commits = 0;
  int commits_not_at_rest = 0;
  int invalid_commits = 0;
  double min_clearance = 0.0;
  bool safe = true;
  double mean_replan_ms = 0.0;
};

struct RunResult {
  RunSummary summary;
  std::vector<StepRecord> log;
};

/// Closed loop until the goal is reached, a safe stop, or the time limit.
RunResult run_scenario(const Scenario& sc, std::optional<std::uint64_t> seed = std::nullopt);

void write_log_csv(std::ostream& os, const std::vector<StepRecord>& log);
void write_summary_json(std::ostream& os, const RunSummary& s);

}  // namespace pap::sim
