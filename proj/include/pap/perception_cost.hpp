#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "pap/camera.hpp"
#include "pap/se3.hpp"
#include "pap/trajectory.hpp"

namespace pap {

struct Feature {
  int id = 0;
  Vec3 position = Vec3::Zero();  // world frame (m)
};

/// Ordered set of tracked landmarks with unique ids.
class FeatureMap {
 public:
  FeatureMap() = default;

  /// Throws std::invalid_argument on duplicate id or non-finite position.
  void add(int id, const Vec3& position);
  bool contains(int id) const;

  std::size_t size() const { return features_.size(); }
  bool empty() const { return features_.empty(); }
  const std::vector<Feature>& features() const { return features_; }
  auto begin() const { return features_.begin(); }
  auto end() const { return features_.end(); }

  /// Text format: one "id x y z" record per line; '#' starts a comment.
  void write(std::ostream& os) const;
  static FeatureMap read(std::istream& is);

 private:
  std::vector<Feature> features_;
  std::vector<int> sorted_ids_;
};

struct PerceptionParams {
  double sigma_n = 1.0;          // px
  double sample_interval = 0.2;  // s
  int min_features = 8;
  double max_condition = 1e8;

  void validate() const;
};

struct FeatureProjection {
  int id = 0;
  Vec3 p_cam = Vec3::Zero();
  PixelCoord pixel;
  Vec2 pixel_velocity = Vec2::Zero();  // px/s
  Mat2 covariance = Mat2::Identity();  // px^2
};

/// 6x6 covariance over the twist [rho; phi].
struct PoseCovariance {
  Mat6 sigma = Mat6::Zero();

  Vec3 position_std() const { return sigma.diagonal().head<3>().cwiseSqrt(); }
  /// (sqrt(S11) + sqrt(S22) + sqrt(S33)) / 3.
  double mean_position_std() const { return position_std().sum() / 3.0; }
};

enum class CovarianceStatus { kOk, kTooFewFeatures, kIllConditioned };

struct PoseCovarianceResult {
  CovarianceStatus status = CovarianceStatus::kTooFewFeatures;
  PoseCovariance covariance;
  int feature_count = 0;

  bool ok() const { return status == CovarianceStatus::kOk; }
};

/// Velocity of a feature in the camera frame when the body moves with world
/// velocity v_wb and body rate omega:
///   -R^CB S(omega) R^BC P' - R^CB S(omega) t^BC - R^CW v_wb
Vec3 feature_camera_velocity(const Vec3& p_cam, const Vec3& v_wb, const Vec3& omega,
                             const Mat3& R_cw, const RigidTransform& T_bc);

/// Time derivative of the pinhole projection. Throws BehindCameraError.
Vec2 feature_image_velocity(const Vec3& p_cam, const Vec3& p_cam_dot, const CameraIntrinsics& K);

/// Blur-aware pixel covariance: variance sigma_n^2 + t_exp^2 |b_dot|^2 / 12
/// along the image velocity and sigma_n^2 across it.
Mat2 feature_covariance(const Vec2& b_dot, double t_exp, double sigma_n);

/// d proj(exp(xi) P') / d xi at xi = 0. Throws BehindCameraError.
Mat26 pose_jacobian(const Vec3& p_cam, const CameraIntrinsics& K);

/// (sum_k J_k^T Sigma_k^-1 J_k)^-1, rejected when fewer than min_features
/// projections are given or the information matrix is ill-conditioned.
PoseCovarianceResult pose_covariance(std::span<const FeatureProjection> projections,
                                     const CameraIntrinsics& K, const PerceptionParams& params);

/// Projects every visible feature at one vehicle state.
std::vector<FeatureProjection> observe_features(const FlatState& state, const FeatureMap& features,
                                                const RigidTransform& T_bc,
                                                const CameraIntrinsics& K,
                                                const PerceptionParams& params);

/// Pose covariance at a single vehicle state (the N = 1 case of the cost).
PoseCovarianceResult pose_uncertainty(const FlatState& state, const FeatureMap& features,
                                      const RigidTransform& T_bc, const CameraIntrinsics& K,
                                      const PerceptionParams& params);

/// Number of poses sampled along a trajectory of duration T.
int perception_sample_count(double duration, const PerceptionParams& params);

/// Mean per-axis position standard deviation (m) over poses sampled along the
/// trajectory; +infinity if any sampled pose is rejected.
double perception_cost(const QuinticTrajectory& traj, const FeatureMap& features,
                       const RigidTransform& T_bc, const CameraIntrinsics& K,
                       const PerceptionParams& params, const Vec3& gravity = kDefaultGravity);

}  // namespace pap
