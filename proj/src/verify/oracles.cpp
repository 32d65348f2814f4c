#include "pap/verify/oracles.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <limits>

namespace pap::verify {

Eigen::Matrix4d twist_exp_reference(const Vec6& xi) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
  const Vec3 w = xi.tail<3>();
  m(0, 1) = -w.z();
  m(0, 2) = w.y();
  m(1, 0) = w.z();
  m(1, 2) = -w.x();
  m(2, 0) = -w.y();
  m(2, 1) = w.x();
  m.block<3, 1>(0, 3) = xi.head<3>();
  return m.exp();
}

Vec2 pinhole_reference(const Vec3& p, const CameraIntrinsics& K) {
  return {K.fx * p.x() / p.z() + K.cx, K.fy * p.y() / p.z() + K.cy};
}

namespace {

Vec2 perturbed_projection(const Vec3& p, const CameraIntrinsics& K, const Vec6& xi) {
  const Eigen::Matrix4d T = twist_exp_reference(xi);
  const Vec3 q = T.block<3, 3>(0, 0) * p + T.block<3, 1>(0, 3);
  return pinhole_reference(q, K);
}

}  // namespace

Mat26 numeric_pose_jacobian(const Vec3& p, const CameraIntrinsics& K, double h) {
  Mat26 J;
  for (int i = 0; i < 6; ++i) {
    Vec6 e = Vec6::Zero();
    e[i] = h;
    const Vec2 d1 = perturbed_projection(p, K, e) - perturbed_projection(p, K, -e);
    const Vec2 d2 = perturbed_projection(p, K, 2 * e) - perturbed_projection(p, K, -2 * e);
    J.col(i) = (8.0 * d1 - d2) / (12.0 * h);
  }
  return J;
}

Vec3 numeric_derivative(const std::function<Vec3(double)>& f, double t, double h) {
  return (8.0 * (f(t + h) - f(t - h)) - (f(t + 2 * h) - f(t - 2 * h))) / (12.0 * h);
}

Vec6 gauss_newton_pose(const std::vector<Vec3>& points, const std::vector<Vec2>& observations,
                       const std::vector<Mat2>& weights, const CameraIntrinsics& K,
                       int iterations) {
  constexpr double h = 1e-6;
  Vec6 xi = Vec6::Zero();
  for (int it = 0; it < iterations; ++it) {
    Mat6 H = Mat6::Zero();
    Vec6 g = Vec6::Zero();
    for (std::size_t k = 0; k < points.size(); ++k) {
      const Vec2 r = observations[k] - perturbed_projection(points[k], K, xi);
      Mat26 J;
      for (int i = 0; i < 6; ++i) {
        Vec6 e = Vec6::Zero();
        e[i] = h;
        J.col(i) = (perturbed_projection(points[k], K, xi + e) -
                    perturbed_projection(points[k], K, xi - e)) /
                   (2 * h);
      }
      H += J.transpose() * weights[k] * J;
      g += J.transpose() * weights[k] * r;
    }
    xi += H.ldlt().solve(g);
  }
  return xi;
}

PointCloudOracle::PointCloudOracle(const DepthImage& depth, double cell) : cell_(cell) {
  for (int v = 0; v < depth.height(); ++v) {
    for (int u = 0; u < depth.width(); ++u) {
      if (!depth.valid(u, v)) continue;
      const Vec3 p = depth.capture_pose().apply(depth.pixel_point(u, v));
      const auto idx = static_cast<std::uint32_t>(points_.size());
      points_.push_back(p);
      grid_[key(static_cast<int>(std::floor(p.x() / cell_)), static_cast<int>(std::floor(p.y() / cell_)),
                static_cast<int>(std::floor(p.z() / cell_)))]
          .push_back(idx);
    }
  }
}

std::int64_t PointCloudOracle::key(int i, int j, int k) const {
  constexpr std::int64_t kSpan = 1 << 20;
  return ((static_cast<std::int64_t>(i) + kSpan / 2) * kSpan + (j + kSpan / 2)) * kSpan +
         (k + kSpan / 2);
}

double PointCloudOracle::nearest(const Vec3& p, double cap) const {
  double best = cap;
  const int ci = static_cast<int>(std::floor(p.x() / cell_));
  const int cj = static_cast<int>(std::floor(p.y() / cell_));
  const int ck = static_cast<int>(std::floor(p.z() / cell_));
  for (int di = -1; di <= 1; ++di) {
    for (int dj = -1; dj <= 1; ++dj) {
      for (int dk = -1; dk <= 1; ++dk) {
        const auto it = grid_.find(key(ci + di, cj + dj, ck + dk));
        if (it == grid_.end()) continue;
        for (const auto idx : it->second) best = std::min(best, (points_[idx] - p).norm());
      }
    }
  }
  return best;
}

bool in_frustum(const DepthImage& depth, const Vec3& p_world) {
  const Vec3 p = depth.world_to_camera().apply(p_world);
  if (!(p.z() > 0.0)) return false;
  const CameraIntrinsics& K = depth.intrinsics();
  const Vec2 b = pinhole_reference(p, K);
  return b.x() >= 0.0 && b.x() <= K.width && b.y() >= 0.0 && b.y() <= K.height;
}

}  // namespace pap::verify
