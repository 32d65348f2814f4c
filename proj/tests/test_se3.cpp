#include <gtest/gtest.h>

#include <random>

#include "pap/se3.hpp"

using namespace pap;

namespace {

std::mt19937_64 rng(7);

Vec3 random_vec(double scale = 1.0) {
  std::uniform_real_distribution<double> U(-scale, scale);
  return {U(rng), U(rng), U(rng)};
}

RigidTransform random_transform() { return {exp_so3(random_vec(3.0)), random_vec(5.0)}; }

// Truncated power series of the 4x4 twist matrix.
Eigen::Matrix4d series_exp(const Twist& xi, int terms = 20) {
  Eigen::Matrix4d X = Eigen::Matrix4d::Zero();
  X.topLeftCorner<3, 3>() = skew(xi.phi);
  X.topRightCorner<3, 1>() = xi.rho;
  Eigen::Matrix4d out = Eigen::Matrix4d::Identity();
  Eigen::Matrix4d term = Eigen::Matrix4d::Identity();
  for (int k = 1; k < terms; ++k) {
    term = term * X / k;
    out += term;
  }
  return out;
}

}  // namespace

TEST(Skew, KnownValues) {
  EXPECT_TRUE(skew(Vec3::Zero()).isZero(0.0));
  Mat3 ez;
  ez << 0, -1, 0, 1, 0, 0, 0, 0, 0;
  EXPECT_TRUE(skew(Vec3(0, 0, 1)).isApprox(ez));
}

TEST(Skew, MatchesCrossProduct) {
  for (int i = 0; i < 100; ++i) {
    const Vec3 v = random_vec(10.0), w = random_vec(10.0);
    EXPECT_LT((skew(v) * w - v.cross(w)).norm(), 1e-12);
  }
}

TEST(ExpSE3, ZeroAndPureTranslation) {
  const RigidTransform I = exp_se3(Twist{});
  EXPECT_TRUE(I.rotation().isIdentity(0.0));
  EXPECT_TRUE(I.translation().isZero(0.0));

  const RigidTransform T = exp_se3(Twist{Vec3(1, 2, 3), Vec3::Zero()});
  EXPECT_TRUE(T.rotation().isIdentity(0.0));
  EXPECT_LT((T.translation() - Vec3(1, 2, 3)).norm(), 1e-15);
}

TEST(ExpSE3, MatchesSeries) {
  for (int i = 0; i < 200; ++i) {
    const Twist xi{random_vec(0.5), random_vec(0.5)};
    const Eigen::Matrix4d ref = series_exp(xi);
    EXPECT_LT((exp_se3(xi).matrix() - ref).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(ExpSE3, TinyRotationIsStable) {
  const Twist xi{Vec3(0.3, -0.2, 0.1), Vec3(1e-12, -2e-12, 3e-13)};
  EXPECT_LT((exp_se3(xi).matrix() - series_exp(xi)).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LT(orthonormality_error(exp_so3(Vec3(1e-14, 0, 0))), 1e-15);
}

TEST(ExpSO3, Orthonormal) {
  for (int i = 0; i < 100; ++i) EXPECT_LT(orthonormality_error(exp_so3(random_vec(4.0))), 1e-12);
}

TEST(Compose, Identity) {
  const RigidTransform T = random_transform();
  const RigidTransform a = compose(T, RigidTransform::identity());
  const RigidTransform b = compose(RigidTransform::identity(), T);
  EXPECT_TRUE(a.matrix().isApprox(T.matrix(), 1e-15));
  EXPECT_TRUE(b.matrix().isApprox(T.matrix(), 1e-15));
}

TEST(Compose, MatchesSequentialApplication) {
  for (int i = 0; i < 100; ++i) {
    const RigidTransform A = random_transform(), B = random_transform();
    const Vec3 p = random_vec(10.0);
    EXPECT_LT((compose(A, B).apply(p) - A.apply(B.apply(p))).norm(), 1e-12);
    EXPECT_LT(((A * B).matrix() - A.matrix() * B.matrix()).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Inverse, RoundTrip) {
  for (int i = 0; i < 50; ++i) {
    const RigidTransform T = random_transform();
    EXPECT_LT((compose(T, T.inverse()).matrix() - Eigen::Matrix4d::Identity()).norm(), 1e-12);
  }
}

TEST(TransformPoint, KnownValues) {
  EXPECT_EQ(transform_point(RigidTransform::identity(), Vec3(1, 2, 3)), Vec3(1, 2, 3));
  EXPECT_EQ(transform_point(RigidTransform(Mat3::Identity(), Vec3(1, 0, 0)), Vec3::Zero()),
            Vec3(1, 0, 0));
}

TEST(TransformPoint, MatchesArithmetic) {
  for (int i = 0; i < 100; ++i) {
    const RigidTransform T = random_transform();
    const Vec3 p = random_vec(10.0);
    Vec3 ref;
    for (int r = 0; r < 3; ++r) {
      ref[r] = T.translation()[r];
      for (int c = 0; c < 3; ++c) ref[r] += T.rotation()(r, c) * p[c];
    }
    EXPECT_LT((transform_point(T, p) - ref).norm(), 1e-12);
  }
}
