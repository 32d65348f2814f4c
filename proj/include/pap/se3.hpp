#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace pap {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Mat26 = Eigen::Matrix<double, 2, 6>;

/// 3x3 skew-symmetric matrix such that skew(v) * w == v.cross(w).
Mat3 skew(const Vec3& v);

/// se(3) perturbation, translational part first: xi = [rho; phi].
/// The ordering matches d(exp(xi) p)/d(xi) = [I | -skew(p)] at xi = 0.
struct Twist {
  Vec3 rho = Vec3::Zero();
  Vec3 phi = Vec3::Zero();

  static Twist from_vector(const Vec6& xi) { return {xi.head<3>(), xi.tail<3>()}; }
  Vec6 vector() const {
    Vec6 xi;
    xi << rho, phi;
    return xi;
  }
};

/// Rigid-body transform p -> R p + t. Naming follows the frame convention
/// T_ab: maps coordinates expressed in frame b into frame a.
class RigidTransform {
 public:
  RigidTransform() : rotation_(Mat3::Identity()), translation_(Vec3::Zero()) {}
  RigidTransform(const Mat3& rotation, const Vec3& translation)
      : rotation_(rotation), translation_(translation) {}

  static RigidTransform identity() { return {}; }

  const Mat3& rotation() const { return rotation_; }
  const Vec3& translation() const { return translation_; }

  Vec3 apply(const Vec3& p) const { return rotation_ * p + translation_; }
  RigidTransform inverse() const;

  /// Homogeneous 4x4 form.
  Eigen::Matrix4d matrix() const;

 private:
  Mat3 rotation_;
  Vec3 translation_;
};

/// compose(a, b).apply(p) == a.apply(b.apply(p)).
RigidTransform compose(const RigidTransform& a, const RigidTransform& b);

inline RigidTransform operator*(const RigidTransform& a, const RigidTransform& b) {
  return compose(a, b);
}

Vec3 transform_point(const RigidTransform& T, const Vec3& p);

/// Rodrigues rotation exp(skew(phi)).
Mat3 exp_so3(const Vec3& phi);

/// Exponential map se(3) -> SE(3); translation is V(phi) * rho.
RigidTransform exp_se3(const Twist& xi);

/// Max deviation of R^T R from identity and |det R - 1|.
double orthonormality_error(const Mat3& R);

}  // namespace pap
