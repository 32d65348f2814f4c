#pragma once

#include <cstdint>
#include <vector>

#include "pap/camera.hpp"
#include "pap/perception_cost.hpp"

namespace pap::sim {

struct Sphere {
  Vec3 center = Vec3::Zero();
  double radius = 1.0;
};

struct Box {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Ones();
  bool contains(const Vec3& p) const {
    return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
  }
};

/// Static scene: obstacles, surface features and the goal.
struct World {
  std::vector<Sphere> spheres;
  std::vector<Box> boxes;
  FeatureMap features;
  Vec3 goal = Vec3::Zero();
  Box bounds{Vec3::Constant(-100.0), Vec3::Constant(100.0)};
};

/// Smallest t >= 0 with origin + t * dir on an obstacle surface (infinity if none).
/// A ray starting inside an obstacle hits at t = 0.
double cast_ray(const World& world, const Vec3& origin, const Vec3& dir);

/// Signed distance from p to the nearest obstacle surface (negative inside).
double obstacle_distance(const World& world, const Vec3& p);

/// z-depth image seen from camera pose T^WC. Hits nearer than d_min read d_min,
/// hits beyond d_max read d_max, pixels whose ray hits nothing are NaN.
DepthImage render_depth(const World& world, const RigidTransform& T_wc, const CameraIntrinsics& K);

/// Occlusion slack for visibility tests (m).
inline constexpr double kOcclusionTolerance = 0.1;

/// In the field of view and not hidden behind an obstacle.
bool feature_visible(const World& world, const RigidTransform& T_wc, const CameraIntrinsics& K,
                     const Vec3& p_world);

/// Adds every visible, not yet discovered world feature to `discovered`.
/// Returns the number of newly discovered features.
int discover_features(const World& world, const RigidTransform& T_wc, const CameraIntrinsics& K,
                      FeatureMap& discovered);

/// Number of world features visible from T^WC.
int count_visible_features(const World& world, const RigidTransform& T_wc,
                           const CameraIntrinsics& K);

/// Scatters features uniformly over the surface of each primitive at the given
/// density (features per m^2), 0.01 m outside the surface. Features that land
/// inside another obstacle are dropped. Ids continue from `first_id`.
struct SurfaceDensity {
  bool is_sphere = false;
  std::size_t index = 0;
  double density = 0.0;
};
void generate_surface_features(World& world, const std::vector<SurfaceDensity>& recipe,
                               std::uint64_t seed, int first_id);

}  // namespace pap::sim
