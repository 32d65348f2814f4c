#include "pap/se3.hpp"

#include <algorithm>
#include <cmath>

namespace pap {

namespace {
// Below this angle the Rodrigues coefficients switch to Taylor expansions.
constexpr double kSmallAngle = 1e-6;
}  // namespace

Mat3 skew(const Vec3& v) {
  Mat3 S;
  S << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return S;
}

RigidTransform RigidTransform::inverse() const {
  const Mat3 Rt = rotation_.transpose();
  return {Rt, -Rt * translation_};
}

Eigen::Matrix4d RigidTransform::matrix() const {
  Eigen::Matrix4d M = Eigen::Matrix4d::Identity();
  M.topLeftCorner<3, 3>() = rotation_;
  M.topRightCorner<3, 1>() = translation_;
  return M;
}

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
  return {a.rotation() * b.rotation(), a.rotation() * b.translation() + a.translation()};
}

Vec3 transform_point(const RigidTransform& T, const Vec3& p) { return T.apply(p); }

Mat3 exp_so3(const Vec3& phi) {
  const double theta2 = phi.squaredNorm();
  const double theta = std::sqrt(theta2);
  const Mat3 K = skew(phi);
  double a, b;
  if (theta < kSmallAngle) {
    a = 1.0 - theta2 / 6.0;
    b = 0.5 - theta2 / 24.0;
  } else {
    a = std::sin(theta) / theta;
    b = (1.0 - std::cos(theta)) / theta2;
  }
  return Mat3::Identity() + a * K + b * K * K;
}

RigidTransform exp_se3(const Twist& xi) {
  const double theta2 = xi.phi.squaredNorm();
  const double theta = std::sqrt(theta2);
  const Mat3 K = skew(xi.phi);
  double b, c;
  if (theta < kSmallAngle) {
    b = 0.5 - theta2 / 24.0;
    c = 1.0 / 6.0 - theta2 / 120.0;
  } else {
    b = (1.0 - std::cos(theta)) / theta2;
    c = (theta - std::sin(theta)) / (theta2 * theta);
  }
  const Mat3 V = Mat3::Identity() + b * K + c * K * K;
  return {exp_so3(xi.phi), V * xi.rho};
}

double orthonormality_error(const Mat3& R) {
  const double ortho = (R.transpose() * R - Mat3::Identity()).cwiseAbs().maxCoeff();
  return std::max(ortho, std::abs(R.determinant() - 1.0));
}

}  // namespace pap
