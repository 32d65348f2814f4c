#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "pap/camera.hpp"
#include "pap/verify/oracles.hpp"

using namespace pap;

namespace {

std::mt19937_64 rng(3);

double uni(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

CameraIntrinsics random_intrinsics() {
  CameraIntrinsics K;
  K.width = 640;
  K.height = 480;
  K.fx = uni(100, 800);
  K.fy = uni(100, 800);
  K.cx = uni(200, 440);
  K.cy = uni(150, 330);
  return K;
}

RigidTransform random_pose() {
  return {exp_so3(Vec3(uni(-3, 3), uni(-3, 3), uni(-3, 3))), Vec3(uni(-5, 5), uni(-5, 5), uni(-5, 5))};
}

}  // namespace

TEST(Project, OpticalAxis) {
  const CameraIntrinsics K = random_intrinsics();
  const PixelCoord b = project(K, Vec3(0, 0, 1));
  EXPECT_DOUBLE_EQ(b.u, K.cx);
  EXPECT_DOUBLE_EQ(b.v, K.cy);
}

TEST(Project, KnownValue) {
  CameraIntrinsics K;
  K.fx = K.fy = 100;
  K.cx = 320;
  K.cy = 240;
  K.width = 640;
  K.height = 480;
  const PixelCoord b = project(K, Vec3(1, 0, 2));
  EXPECT_DOUBLE_EQ(b.u, 370.0);
  EXPECT_DOUBLE_EQ(b.v, 240.0);
}

TEST(Project, BehindCamera) {
  EXPECT_THROW(project(CameraIntrinsics{}, Vec3(0, 0, 0)), BehindCameraError);
  EXPECT_THROW(project(CameraIntrinsics{}, Vec3(1, 0, -1)), BehindCameraError);
}

TEST(Project, MatchesReferenceAndRoundTrips) {
  for (int i = 0; i < 500; ++i) {
    const CameraIntrinsics K = random_intrinsics();
    const Vec3 p(uni(-3, 3), uni(-3, 3), uni(0.5, 10));
    const PixelCoord b = project(K, p);
    const Vec2 ref = verify::pinhole_reference(p, K);
    EXPECT_NEAR(b.u, ref.x(), 1e-9);
    EXPECT_NEAR(b.v, ref.y(), 1e-9);
    EXPECT_LT((unproject(K, b, p.z()) - p).norm(), 1e-12);
  }
}

TEST(Visible, Cases) {
  const CameraIntrinsics K;
  EXPECT_FALSE(is_visible(K, Vec3(0, 0, -1)));
  EXPECT_TRUE(is_visible(K, Vec3(0, 0, 0.5 * (K.d_min + K.d_max))));
  EXPECT_FALSE(is_visible(K, Vec3(0, 0, 0.5 * K.d_min)));
  EXPECT_FALSE(is_visible(K, Vec3(0, 0, 2 * K.d_max)));
  // Exactly on the image border at depth 4.
  const double z = 4.0;
  EXPECT_TRUE(is_visible(K, Vec3((0 - K.cx) / K.fx * z, 0, z)));
  EXPECT_TRUE(is_visible(K, Vec3((K.width - K.cx) / K.fx * z, (K.height - K.cy) / K.fy * z, z)));
  EXPECT_FALSE(is_visible(K, Vec3((K.width + 0.01 - K.cx) / K.fx * z, 0, z)));
}

TEST(Intrinsics, Validate) {
  CameraIntrinsics K;
  EXPECT_NO_THROW(K.validate());
  K.fx = -1;
  EXPECT_THROW(K.validate(), std::invalid_argument);
  K = {};
  K.d_max = K.d_min;
  EXPECT_THROW(K.validate(), std::invalid_argument);
  K = {};
  K.t_exp = -0.001;
  EXPECT_THROW(K.validate(), std::invalid_argument);
}

TEST(CameraPose, Identity) {
  const RigidTransform T = camera_pose_from_body(RigidTransform{}, RigidTransform{});
  EXPECT_TRUE(T.matrix().isIdentity(0.0));
}

TEST(CameraPose, MatchesExpandedForm) {
  for (int i = 0; i < 100; ++i) {
    const RigidTransform T_wb = random_pose(), T_bc = random_pose();
    const RigidTransform T_cw = camera_pose_from_body(T_wb, T_bc);
    const Mat3 R_cw = T_bc.rotation().transpose() * T_wb.rotation().transpose();
    const Vec3 t_cw = -R_cw * T_wb.translation() - T_bc.rotation().transpose() * T_bc.translation();
    EXPECT_LT((T_cw.rotation() - R_cw).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((T_cw.translation() - t_cw).norm(), 1e-12);
  }
}

TEST(CameraPose, ForwardMount) {
  const RigidTransform T_bc = forward_camera_mount();
  // Optical axis along body x, image right along body -y, image down along body -z.
  EXPECT_LT((T_bc.rotation() * Vec3(0, 0, 1) - Vec3(1, 0, 0)).norm(), 1e-15);
  EXPECT_LT((T_bc.rotation() * Vec3(1, 0, 0) - Vec3(0, -1, 0)).norm(), 1e-15);
  EXPECT_LT((T_bc.rotation() * Vec3(0, 1, 0) - Vec3(0, 0, -1)).norm(), 1e-15);
  EXPECT_EQ(T_bc.translation(), Vec3(0.1, 0, 0));
}

TEST(DepthImage, SerializationRoundTrip) {
  CameraIntrinsics K;
  K.width = 7;
  K.height = 5;
  K.fx = 10.5;
  K.fy = 11.25;
  K.cx = 3.5;
  K.cy = 2.5;
  DepthImage img(K, RigidTransform{});
  for (int v = 0; v < K.height; ++v)
    for (int u = 0; u < K.width; ++u) img.set(u, v, static_cast<float>(0.5 + 0.1 * u + v));
  img.set(2, 3, kInvalidDepth);

  std::stringstream ss;
  img.write(ss);
  const DepthImage back = DepthImage::read(ss);
  EXPECT_EQ(back.width(), 7);
  EXPECT_EQ(back.height(), 5);
  EXPECT_DOUBLE_EQ(back.intrinsics().fy, 11.25);
  EXPECT_FALSE(back.valid(2, 3));
  for (int v = 0; v < K.height; ++v) {
    for (int u = 0; u < K.width; ++u) {
      if (!(u == 2 && v == 3)) {
        EXPECT_EQ(back.at(u, v), img.at(u, v));
      }
    }
  }

  std::stringstream again;
  back.write(again);
  std::stringstream first;
  img.write(first);
  EXPECT_EQ(again.str(), first.str());
}

TEST(DepthImage, MalformedInput) {
  std::stringstream bad("7 5 abc\n");
  EXPECT_THROW(DepthImage::read(bad), std::runtime_error);
  std::stringstream truncated("2 2 1 1 1 1\nxyz");
  EXPECT_THROW(DepthImage::read(truncated), std::runtime_error);
}
