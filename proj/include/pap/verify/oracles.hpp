#pragma once

#include <cstdint>
#include <functional>
#include <unordered_map>
#include <vector>

#include "pap/camera.hpp"
#include "pap/se3.hpp"
#include "pap/trajectory.hpp"

// Reference implementations used to check the planner's analytic pieces.
// They favor directness over speed.
namespace pap::verify {

/// exp of the 4x4 twist matrix by a general matrix exponential.
Eigen::Matrix4d twist_exp_reference(const Vec6& xi);

/// Pinhole projection written out by hand.
Vec2 pinhole_reference(const Vec3& p, const CameraIntrinsics& K);

/// Fourth-order central differences of proj(exp(xi) p) at xi = 0.
Mat26 numeric_pose_jacobian(const Vec3& p, const CameraIntrinsics& K, double h = 1e-3);

/// Fourth-order central difference of a vector function of time.
Vec3 numeric_derivative(const std::function<Vec3(double)>& f, double t, double h);

/// Minimizes sum_k |b_k - proj(exp(xi) P_k)|^2_{W_k} by Gauss-Newton with a
/// numeric Jacobian, starting from xi = 0.
Vec6 gauss_newton_pose(const std::vector<Vec3>& points, const std::vector<Vec2>& observations,
                       const std::vector<Mat2>& weights, const CameraIntrinsics& K,
                       int iterations = 5);

/// Depth returns of an image as a world-frame point cloud with a voxel hash
/// for nearest-distance queries.
class PointCloudOracle {
 public:
  PointCloudOracle(const DepthImage& depth, double cell);
  /// Distance to the nearest point, or `cap` if none lies within cap <= cell.
  double nearest(const Vec3& p, double cap) const;
  std::size_t size() const { return points_.size(); }

 private:
  std::int64_t key(int i, int j, int k) const;
  double cell_;
  std::vector<Vec3> points_;
  std::unordered_map<std::int64_t, std::vector<std::uint32_t>> grid_;
};

/// Point projects strictly in front of the camera and inside the image.
bool in_frustum(const DepthImage& depth, const Vec3& p_world);

}  // namespace pap::verify
