#include <gtest/gtest.h>

#include <sstream>

#include "pap/perception_cost.hpp"
#include "pap/verify/oracles.hpp"
#include "pap/verify/suites.hpp"

using namespace pap;
using namespace pap::verify;

TEST(Suites, JacobianPasses) {
  const SuiteReport r = jacobian_suite(300, 2);
  EXPECT_TRUE(r.pass());
  ASSERT_EQ(r.cases.size(), 1u);
  EXPECT_LT(r.cases[0].value, 1e-7);
}

TEST(Suites, PerturbedJacobianFails) {
  const JacobianFn perturbed = [](const Vec3& p, const CameraIntrinsics& K) {
    Mat26 J = pose_jacobian(p, K);
    J(0, 0) *= 1.001;
    return J;
  };
  const SuiteReport r = jacobian_suite(300, 2, perturbed);
  EXPECT_FALSE(r.pass());
  ASSERT_NE(r.worst(), nullptr);
  EXPECT_GT(r.worst()->value, 1e-5);
}

TEST(Suites, CovariancePasses) {
  const SuiteReport r = covariance_suite(3000, 3);
  EXPECT_TRUE(r.pass()) << [&] {
    std::ostringstream os;
    r.print(os);
    return os.str();
  }();
}

TEST(Suites, TrajectoryPasses) { EXPECT_TRUE(trajectory_suite(1000, 4).pass()); }

TEST(Suites, CollisionPasses) {
  const SuiteReport r = collision_suite(40, 10, 5);
  EXPECT_TRUE(r.pass());
  EXPECT_EQ(r.cases[0].value, 0.0);
}

TEST(Suites, Registry) {
  const auto& names = suite_names();
  EXPECT_EQ(names.size(), 4u);
  EXPECT_THROW(run_suite("nope"), std::invalid_argument);
}

TEST(Report, PrintAndWorst) {
  SuiteReport r;
  r.suite = "demo";
  r.cases.push_back({"a", 1.0, 10.0});
  r.cases.push_back({"b", 3.0, 4.0});
  EXPECT_TRUE(r.pass());
  EXPECT_EQ(r.worst()->name, "b");
  r.cases.push_back({"c", 5.0, 5.0});
  EXPECT_FALSE(r.pass());
  std::ostringstream os;
  r.print(os);
  EXPECT_NE(os.str().find("demo"), std::string::npos);
  EXPECT_NE(os.str().find("FAIL"), std::string::npos);
}

TEST(Oracles, PinholeReference) {
  CameraIntrinsics K;
  K.fx = 200;
  K.fy = 150;
  K.cx = 100;
  K.cy = 50;
  const Vec2 b = pinhole_reference(Vec3(1, 2, 4), K);
  EXPECT_DOUBLE_EQ(b.x(), 150.0);
  EXPECT_DOUBLE_EQ(b.y(), 125.0);
}
