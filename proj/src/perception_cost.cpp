#include "pap/perception_cost.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

namespace pap {

// ---------------------------------------------------------------------------
// FeatureMap

void FeatureMap::add(int id, const Vec3& position) {
  if (!position.allFinite()) throw std::invalid_argument("feature position must be finite");
  const auto it = std::lower_bound(sorted_ids_.begin(), sorted_ids_.end(), id);
  if (it != sorted_ids_.end() && *it == id) {
    throw std::invalid_argument("duplicate feature id " + std::to_string(id));
  }
  sorted_ids_.insert(it, id);
  features_.push_back({id, position});
}

bool FeatureMap::contains(int id) const {
  return std::binary_search(sorted_ids_.begin(), sorted_ids_.end(), id);
}

void FeatureMap::write(std::ostream& os) const {
  std::ostringstream out;
  out.precision(17);
  for (const auto& f : features_) {
    out << f.id << ' ' << f.position.x() << ' ' << f.position.y() << ' ' << f.position.z() << '\n';
  }
  os << out.str();
}

FeatureMap FeatureMap::read(std::istream& is) {
  FeatureMap map;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream rec(line);
    int id;
    double x, y, z;
    if (!(rec >> id)) continue;  // blank line
    std::string extra;
    if (!(rec >> x >> y >> z) || (rec >> extra)) {
      throw std::runtime_error("feature map line " + std::to_string(line_no) +
                               ": expected 'id x y z'");
    }
    try {
      map.add(id, {x, y, z});
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error("feature map line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return map;
}

// ---------------------------------------------------------------------------
// Per-feature terms

void PerceptionParams::validate() const {
  if (!(sigma_n > 0.0)) throw std::invalid_argument("sigma_n must be positive");
  if (!(sample_interval > 0.0)) throw std::invalid_argument("sample interval must be positive");
  if (min_features < 3) throw std::invalid_argument("min_features must be >= 3");
  if (!(max_condition > 1.0)) throw std::invalid_argument("max_condition must exceed 1");
}

Vec3 feature_camera_velocity(const Vec3& p_cam, const Vec3& v_wb, const Vec3& omega,
                             const Mat3& R_cw, const RigidTransform& T_bc) {
  const Mat3& R_bc = T_bc.rotation();
  const Mat3 R_cb = R_bc.transpose();
  const Mat3 S = skew(omega);
  return -R_cb * S * R_bc * p_cam - R_cb * S * T_bc.translation() - R_cw * v_wb;
}

Vec2 feature_image_velocity(const Vec3& p, const Vec3& p_dot, const CameraIntrinsics& K) {
  if (!(p.z() > 0.0)) throw BehindCameraError("feature is not in front of the camera");
  const double z2 = p.z() * p.z();
  return {K.fx * (p_dot.x() * p.z() - p.x() * p_dot.z()) / z2,
          K.fy * (p_dot.y() * p.z() - p.y() * p_dot.z()) / z2};
}

Mat2 feature_covariance(const Vec2& b_dot, double t_exp, double sigma_n) {
  const double n2 = sigma_n * sigma_n;
  const double speed2 = b_dot.squaredNorm();
  if (speed2 == 0.0 || t_exp == 0.0) return n2 * Mat2::Identity();

  const double blur2 = t_exp * t_exp * speed2 / 12.0;
  const Vec2 dir = b_dot / std::sqrt(speed2);
  const double du = dir.x();
  const double dv = dir.y();
  const double unit = du * du + dv * dv;
  Mat2 sigma;
  sigma << du * du * blur2 + unit * n2, du * dv * blur2,
           du * dv * blur2, dv * dv * blur2 + unit * n2;
  return sigma;
}

Mat26 pose_jacobian(const Vec3& p, const CameraIntrinsics& K) {
  if (!(p.z() > 0.0)) throw BehindCameraError("feature is not in front of the camera");
  const double X = p.x();
  const double Y = p.y();
  const double iz = 1.0 / p.z();
  const double iz2 = iz * iz;
  const double fx = K.fx;
  const double fy = K.fy;
  Mat26 J;
  J << fx * iz, 0.0, -fx * X * iz2, -fx * X * Y * iz2, fx + fx * X * X * iz2, -fx * Y * iz,
       0.0, fy * iz, -fy * Y * iz2, -fy - fy * Y * Y * iz2, fy * X * Y * iz2, fy * X * iz;
  return J;
}

namespace {

// H += J^T Sigma^-1 J with the closed-form 2x2 inverse.
void accumulate_information(Mat6& H, const Mat26& J, const Mat2& sigma) {
  const double det = sigma(0, 0) * sigma(1, 1) - sigma(0, 1) * sigma(1, 0);
  Mat2 info;
  info << sigma(1, 1) / det, -sigma(0, 1) / det,
          -sigma(1, 0) / det, sigma(0, 0) / det;
  H.noalias() += J.transpose() * info * J;
}

PoseCovarianceResult invert_information(const Mat6& H, int count,
                                        const PerceptionParams& params) {
  PoseCovarianceResult result;
  result.feature_count = count;
  if (count < params.min_features) {
    result.status = CovarianceStatus::kTooFewFeatures;
    return result;
  }
  const Eigen::SelfAdjointEigenSolver<Mat6> eig(H);
  const Vec6& lambda = eig.eigenvalues();  // ascending
  if (eig.info() != Eigen::Success || !(lambda(0) > 0.0) ||
      lambda(5) > params.max_condition * lambda(0)) {
    result.status = CovarianceStatus::kIllConditioned;
    return result;
  }
  const Mat6& V = eig.eigenvectors();
  result.covariance.sigma = V * lambda.cwiseInverse().asDiagonal() * V.transpose();
  result.status = CovarianceStatus::kOk;
  return result;
}

// Per-pose quantities shared by every feature seen from that pose.
struct PoseContext {
  RigidTransform T_cw;
  Vec3 omega_cam;      // R^CB omega
  Vec3 velocity_bias;  // -R^CB S(omega) t^BC - R^CW v
};

PoseContext make_pose_context(const FlatState& state, const RigidTransform& T_bc) {
  PoseContext ctx;
  ctx.T_cw = camera_pose_from_body(state.pose, T_bc);
  const Mat3 R_cb = T_bc.rotation().transpose();
  ctx.omega_cam = R_cb * state.body_rate;
  ctx.velocity_bias = -R_cb * state.body_rate.cross(T_bc.translation()) -
                      ctx.T_cw.rotation() * state.velocity;
  return ctx;
}

template <typename Visit>
int for_each_visible(const PoseContext& ctx, const FeatureMap& features,
                     const CameraIntrinsics& K, const PerceptionParams& params, Visit&& visit) {
  int count = 0;
  for (const auto& f : features) {
    const Vec3 p = ctx.T_cw.apply(f.position);
    if (!is_visible(K, p)) continue;
    // -R^CB S(w) R^BC P' == -(R^CB w) x P'
    const Vec3 p_dot = -ctx.omega_cam.cross(p) + ctx.velocity_bias;
    const Vec2 b_dot = feature_image_velocity(p, p_dot, K);
    visit(f, p, b_dot, feature_covariance(b_dot, K.t_exp, params.sigma_n));
    ++count;
  }
  return count;
}

PoseCovarianceResult pose_uncertainty_impl(const FlatState& state, const FeatureMap& features,
                                           const RigidTransform& T_bc,
                                           const CameraIntrinsics& K,
                                           const PerceptionParams& params) {
  const PoseContext ctx = make_pose_context(state, T_bc);
  Mat6 H = Mat6::Zero();
  const int count = for_each_visible(
      ctx, features, K, params,
      [&](const Feature&, const Vec3& p, const Vec2&, const Mat2& sigma) {
        accumulate_information(H, pose_jacobian(p, K), sigma);
      });
  return invert_information(H, count, params);
}

}  // namespace

PoseCovarianceResult pose_covariance(std::span<const FeatureProjection> projections,
                                     const CameraIntrinsics& K, const PerceptionParams& params) {
  Mat6 H = Mat6::Zero();
  for (const auto& proj : projections) {
    accumulate_information(H, pose_jacobian(proj.p_cam, K), proj.covariance);
  }
  return invert_information(H, static_cast<int>(projections.size()), params);
}

std::vector<FeatureProjection> observe_features(const FlatState& state, const FeatureMap& features,
                                                const RigidTransform& T_bc,
                                                const CameraIntrinsics& K,
                                                const PerceptionParams& params) {
  std::vector<FeatureProjection> out;
  const PoseContext ctx = make_pose_context(state, T_bc);
  for_each_visible(ctx, features, K, params,
                   [&](const Feature& f, const Vec3& p, const Vec2& b_dot, const Mat2& sigma) {
                     out.push_back({f.id, p, project(K, p), b_dot, sigma});
                   });
  return out;
}

PoseCovarianceResult pose_uncertainty(const FlatState& state, const FeatureMap& features,
                                      const RigidTransform& T_bc, const CameraIntrinsics& K,
                                      const PerceptionParams& params) {
  return pose_uncertainty_impl(state, features, T_bc, K, params);
}

int perception_sample_count(double duration, const PerceptionParams& params) {
  return static_cast<int>(std::floor(duration / params.sample_interval)) + 1;
}

double perception_cost(const QuinticTrajectory& traj, const FeatureMap& features,
                       const RigidTransform& T_bc, const CameraIntrinsics& K,
                       const PerceptionParams& params, const Vec3& gravity) {
  constexpr double kReject = std::numeric_limits<double>::infinity();
  const int n = perception_sample_count(traj.duration(), params);
  double total = 0.0;
  for (int j = 0; j < n; ++j) {
    // Evenly spaced samples including both t = 0 and t = T.
    const double t = n == 1 ? 0.0 : traj.duration() * j / (n - 1);
    FlatState state;
    try {
      state = flat_state_at(traj, t, gravity);
    } catch (const InfeasibleStateError&) {
      return kReject;
    }
    const PoseCovarianceResult res = pose_uncertainty_impl(state, features, T_bc, K, params);
    if (!res.ok()) return kReject;
    total += res.covariance.position_std().sum();
  }
  return total / (3.0 * n);
}

}  // namespace pap
