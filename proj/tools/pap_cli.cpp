#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "pap/sim/scenario.hpp"
#include "pap/sim/simulator.hpp"
#include "pap/verify/suites.hpp"

namespace fs = std::filesystem;
using namespace pap;

namespace {

enum Exit { kOk = 0, kUsage = 1, kRuntime = 2, kVerify = 3 };

struct Manifest {
  std::string scenario;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::vector<double> k_perc;
  int reps = 1;
};

std::string default_out_dir() {
  const char* env = std::getenv("PAP_OUT_DIR");
  return env != nullptr && *env != '\0' ? env : "out";
}

std::string num(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

std::string run_stem(const sim::Scenario& sc, double k_perc, std::uint64_t seed) {
  return sc.name + "_k" + num(k_perc) + "_seed" + std::to_string(seed);
}

struct ArmResult {
  std::vector<sim::RunSummary> runs;
  bool failed = false;
  std::string error;
};

// Runs `reps` seeds of one planner arm and writes each run's log and summary.
ArmResult run_arm(const sim::Scenario& base, double k_perc, std::uint64_t seed0, int reps,
                  const fs::path& out) {
  sim::Scenario sc = base;
  sc.planner.k_perc = k_perc;
  ArmResult arm;
  for (int i = 0; i < reps; ++i) {
    const std::uint64_t seed = seed0 + static_cast<std::uint64_t>(i);
    try {
      const sim::RunResult res = sim::run_scenario(sc, seed);
      const std::string stem = run_stem(sc, k_perc, seed);
      std::ofstream csv(out / (stem + ".csv"));
      sim::write_log_csv(csv, res.log);
      std::ofstream js(out / (stem + "_summary.json"));
      sim::write_summary_json(js, res.summary);
      if (!res.summary.safe) {
        arm.failed = true;
        arm.error = "safety violation in seed " + std::to_string(seed) + " (clearance " +
                    std::to_string(res.summary.min_clearance) + " m)";
      }
      arm.runs.push_back(res.summary);
    } catch (const std::exception& e) {
      arm.failed = true;
      arm.error = std::string("seed ") + std::to_string(seed) + ": " + e.what();
    }
  }
  return arm;
}

struct Means {
  double omega = 0.0, features = 0.0, speed = 0.0, pos_std = 0.0;
};

Means aggregate(const std::vector<sim::RunSummary>& runs) {
  Means m;
  if (runs.empty()) return m;
  for (const auto& r : runs) {
    m.omega += r.mean_omega;
    m.features += r.mean_features;
    m.speed += r.mean_speed;
    m.pos_std += r.mean_pos_std;
  }
  const double n = static_cast<double>(runs.size());
  m.omega /= n;
  m.features /= n;
  m.speed /= n;
  m.pos_std /= n;
  return m;
}

nlohmann::ordered_json means_json(const Means& m) {
  nlohmann::ordered_json j;
  j["mean_angular_velocity"] = m.omega;
  j["mean_features_in_fov"] = m.features;
  j["mean_speed"] = m.speed;
  j["mean_position_std"] = m.pos_std;
  return j;
}

sim::Scenario load(const Manifest& m) { return sim::load_scenario(m.scenario); }

int cmd_run(const Manifest& m) {
  const sim::Scenario sc = load(m);
  const double k = m.k_perc.empty() ? sc.planner.k_perc : m.k_perc.front();
  const fs::path out(m.out_dir);
  fs::create_directories(out);
  const std::uint64_t seed0 = m.seed.value_or(sc.run.seed);
  const ArmResult arm = run_arm(sc, k, seed0, m.reps, out);

  for (const auto& r : arm.runs) {
    std::printf("seed %llu: %s at t=%.3f s, %.2f m from goal, omega %.4f rad/s, features %.2f, "
                "speed %.4f m/s, pos std %.5f m, min clearance %.3f m\n",
                static_cast<unsigned long long>(r.seed), sim::to_string(r.termination), r.sim_time,
                r.distance_to_goal, r.mean_omega, r.mean_features, r.mean_speed, r.mean_pos_std,
                r.min_clearance);
  }
  nlohmann::ordered_json agg;
  agg["scenario"] = sc.name;
  agg["k_perc"] = k;
  agg["repetitions"] = static_cast<int>(arm.runs.size());
  agg["means"] = means_json(aggregate(arm.runs));
  agg["failed"] = arm.failed;
  std::ofstream(out / (sc.name + "_k" + num(k) + "_aggregate.json")) << agg.dump(2) << '\n';
  if (arm.failed) {
    std::fprintf(stderr, "error: %s\n", arm.error.c_str());
    return kRuntime;
  }
  return kOk;
}

std::string percent(double a, double b) {
  if (a == 0.0) return b == 0.0 ? "0.0%" : "n/a";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%+.1f%%", 100.0 * (b - a) / std::fabs(a));
  return buf;
}

int cmd_compare(const Manifest& m) {
  if (m.k_perc.size() != 2) {
    std::fprintf(stderr, "error: compare needs --k-perc twice (arm A and arm B)\n");
    return kUsage;
  }
  const sim::Scenario sc = load(m);
  const fs::path out(m.out_dir);
  fs::create_directories(out);
  const std::uint64_t seed0 = m.seed.value_or(sc.run.seed);
  const ArmResult a = run_arm(sc, m.k_perc[0], seed0, m.reps, out);
  const ArmResult b = run_arm(sc, m.k_perc[1], seed0, m.reps, out);
  const Means ma = aggregate(a.runs);
  const Means mb = aggregate(b.runs);

  std::ostringstream t;
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-32s %14s %14s %12s\n", "metric",
                ("k_perc=" + num(m.k_perc[0])).c_str(), ("k_perc=" + num(m.k_perc[1])).c_str(),
                "difference");
  t << buf;
  auto row = [&](const char* name, double va, double vb) {
    if (a.failed || b.failed) {
      std::snprintf(buf, sizeof(buf), "%-32s %14s %14s %12s\n", name,
                    a.failed ? "failed" : std::to_string(va).c_str(),
                    b.failed ? "failed" : std::to_string(vb).c_str(), "n/a");
    } else {
      std::snprintf(buf, sizeof(buf), "%-32s %14.4f %14.4f %12s\n", name, va, vb,
                    percent(va, vb).c_str());
    }
    t << buf;
  };
  row("mean angular velocity (rad/s)", ma.omega, mb.omega);
  row("mean feature number in FOV", ma.features, mb.features);
  row("mean speed (m/s)", ma.speed, mb.speed);
  row("mean position std (m)", ma.pos_std, mb.pos_std);

  std::cout << t.str();
  std::ofstream(out / (sc.name + "_compare.txt")) << t.str();
  for (const ArmResult* arm : {&a, &b}) {
    if (arm->failed) std::fprintf(stderr, "error: %s\n", arm->error.c_str());
  }
  return a.failed || b.failed ? kRuntime : kOk;
}

int cmd_verify(const std::string& suite, std::uint64_t seed) {
  std::vector<std::string> names;
  if (suite == "all") {
    names = verify::suite_names();
  } else {
    names.push_back(suite);
  }
  bool ok = true;
  for (const auto& n : names) {
    const verify::SuiteReport r = verify::run_suite(n, seed);
    r.print(std::cout);
    ok = ok && r.pass();
  }
  return ok ? kOk : kVerify;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Perception-aware receding-horizon planner: simulation and verification"};
  app.require_subcommand(1);

  Manifest m;
  m.out_dir = default_out_dir();
  std::uint64_t seed = 0;
  std::string suite = "all";

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--scenario", m.scenario, "Scenario file (YAML)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", m.out_dir, "Output directory (default: $PAP_OUT_DIR or ./out)");
    sub->add_option("--seed", seed, "Base seed (default: the scenario's seed)");
    sub->add_option("--reps", m.reps, "Repetitions; the seed increments per repetition")
        ->check(CLI::PositiveNumber);
  };
  CLI::App* run = app.add_subcommand("run", "Run a scenario");
  add_common(run);
  run->add_option("--k-perc", m.k_perc, "Override the perception weight")->expected(1);

  CLI::App* compare = app.add_subcommand("compare", "Paired runs of two perception weights");
  add_common(compare);
  compare->add_option("--k-perc", m.k_perc, "Perception weight; give twice (arm A, arm B)")
      ->required();

  CLI::App* ver = app.add_subcommand("verify", "Run an oracle verification suite");
  ver->add_option("--suite", suite, "jacobian, covariance, collision, trajectory or all")
      ->check(CLI::IsMember({"jacobian", "covariance", "collision", "trajectory", "all"}));
  ver->add_option("--seed", seed, "Random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (ver->parsed()) return cmd_verify(suite, seed == 0 ? 1 : seed);
    if (run->count("--seed") > 0 || compare->count("--seed") > 0) m.seed = seed;
    if (run->parsed()) return cmd_run(m);
    return cmd_compare(m);
  } catch (const sim::ScenarioError& e) {
    std::fprintf(stderr, "error: %s: %s\n", m.scenario.c_str(), e.what());
    return kUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kRuntime;
  }
}
