#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Output {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("pap_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  Output pap(const std::string& args) {
    const fs::path o = dir_ / "stdout.txt", e = dir_ / "stderr.txt";
    const std::string cmd =
        std::string(PAP_CLI) + " " + args + " > " + o.string() + " 2> " + e.string();
    const int status = std::system(cmd.c_str());
    Output r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(o);
    r.err = slurp(e);
    return r;
  }

  std::string scenario(const std::string& name) const {
    return std::string(PAP_SCENARIO_DIR) + "/" + name + ".yaml";
  }

  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(dir_ / name) << text;
    return dir_ / name;
  }

  fs::path dir_;
};

int count_suffix(const fs::path& d, const std::string& suffix) {
  int n = 0;
  for (const auto& e : fs::directory_iterator(d)) {
    const std::string s = e.path().filename().string();
    if (s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0) ++n;
  }
  return n;
}

}  // namespace

TEST_F(Cli, RunWritesPerRunAndAggregateFiles) {
  const fs::path out = dir_ / "out";
  const Output r = pap("run --scenario " + scenario("open_room") + " --out " + out.string() + " --reps 3");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(count_suffix(out, ".csv"), 3);
  EXPECT_EQ(count_suffix(out, "_summary.json"), 3);
  EXPECT_EQ(count_suffix(out, "_aggregate.json"), 1);
  EXPECT_TRUE(fs::exists(out / "open_room_k100_seed1.csv"));
  EXPECT_TRUE(fs::exists(out / "open_room_k100_seed3_summary.json"));
  const std::string agg = slurp(out / "open_room_k100_aggregate.json");
  EXPECT_NE(agg.find("\"repetitions\": 3"), std::string::npos);
  EXPECT_NE(agg.find("\"mean_angular_velocity\""), std::string::npos);
  EXPECT_NE(r.out.find("goal_reached"), std::string::npos);
}

TEST_F(Cli, RepeatedRunsAreByteIdentical) {
  const std::string args = "run --scenario " + scenario("open_room") + " --reps 2 --seed 4 --k-perc 30";
  ASSERT_EQ(pap(args + " --out " + (dir_ / "a").string()).code, 0);
  ASSERT_EQ(pap(args + " --out " + (dir_ / "b").string()).code, 0);
  int files = 0;
  for (const auto& e : fs::directory_iterator(dir_ / "a")) {
    const fs::path other = dir_ / "b" / e.path().filename();
    ASSERT_TRUE(fs::exists(other)) << other;
    EXPECT_EQ(slurp(e.path()), slurp(other)) << e.path().filename();
    ++files;
  }
  EXPECT_EQ(files, 5);
  EXPECT_TRUE(fs::exists(dir_ / "a" / "open_room_k30_seed5.csv"));
}

TEST_F(Cli, CompareEqualWeightsShowsNoDifference) {
  const Output r = pap("compare --scenario " + scenario("open_room") + " --out " + dir_.string() +
                       " --k-perc 50 --k-perc 50");
  ASSERT_EQ(r.code, 0) << r.err;
  int zeros = 0;
  for (std::size_t pos = r.out.find("0.0%"); pos != std::string::npos; pos = r.out.find("0.0%", pos + 1)) ++zeros;
  EXPECT_EQ(zeros, 4) << r.out;
  EXPECT_NE(r.out.find("mean angular velocity"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir_ / "open_room_compare.txt"));
}

TEST_F(Cli, FailedArmIsReported) {
  // Without obstacle memory the vehicle clips the bare wall in this seed.
  std::string text = slurp(scenario("corridor_one_sided_sunny"));
  text.replace(text.find("run:\n"), 5, "run:\n  obstacle_memory: false\n");
  const fs::path sc = write("no_memory.yaml", text);
  const Output r = pap("compare --scenario " + sc.string() + " --out " + dir_.string() +
                       " --seed 2 --k-perc 0 --k-perc 100");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("failed"), std::string::npos) << r.out;
  EXPECT_NE(r.err.find("safety violation in seed 2"), std::string::npos) << r.err;
}

TEST_F(Cli, MalformedScenario) {
  const fs::path sc = write("bad.yaml", "world:\n  boxes: []\nrun:\n  start: [0, 0, 1]\n  goal: [1, 0, 1]\n  speed: 3\n");
  const Output r = pap("run --scenario " + sc.string() + " --out " + dir_.string());
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("line 6"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("speed"), std::string::npos) << r.err;
}

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(pap("").code, 1);
  EXPECT_EQ(pap("run --scenario /nonexistent.yaml").code, 1);
  EXPECT_EQ(pap("verify --suite nope").code, 1);
  EXPECT_EQ(pap("compare --scenario " + scenario("open_room") + " --k-perc 1").code, 1);
  EXPECT_EQ(pap("--help").code, 0);
}

TEST_F(Cli, VerifySuite) {
  const Output r = pap("verify --suite jacobian");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("jacobian: PASS"), std::string::npos) << r.out;
}
