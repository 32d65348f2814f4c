#include "pap/sim/world.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace pap::sim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double ray_sphere(const Sphere& s, const Vec3& o, const Vec3& d) {
  const Vec3 oc = o - s.center;
  const double c = oc.squaredNorm() - s.radius * s.radius;
  if (c <= 0.0) return 0.0;
  const double a = d.squaredNorm();
  const double b = d.dot(oc);
  const double disc = b * b - a * c;
  if (disc < 0.0) return kInf;
  const double t = (-b - std::sqrt(disc)) / a;
  return t >= 0.0 ? t : kInf;
}

double ray_box(const Box& box, const Vec3& o, const Vec3& d) {
  if (box.contains(o)) return 0.0;
  double t0 = 0.0;
  double t1 = kInf;
  for (int i = 0; i < 3; ++i) {
    if (d[i] == 0.0) {
      if (o[i] < box.min[i] || o[i] > box.max[i]) return kInf;
      continue;
    }
    double a = (box.min[i] - o[i]) / d[i];
    double b = (box.max[i] - o[i]) / d[i];
    if (a > b) std::swap(a, b);
    t0 = std::max(t0, a);
    t1 = std::min(t1, b);
    if (t0 > t1) return kInf;
  }
  return t0;
}

double box_distance(const Box& box, const Vec3& p) {
  const Vec3 q = (box.min - p).cwiseMax(p - box.max);
  return q.cwiseMax(0.0).norm() + std::min(q.maxCoeff(), 0.0);
}

}  // namespace

double cast_ray(const World& world, const Vec3& origin, const Vec3& dir) {
  double best = kInf;
  for (const auto& s : world.spheres) best = std::min(best, ray_sphere(s, origin, dir));
  for (const auto& b : world.boxes) best = std::min(best, ray_box(b, origin, dir));
  return best;
}

double obstacle_distance(const World& world, const Vec3& p) {
  double best = kInf;
  for (const auto& s : world.spheres) best = std::min(best, (p - s.center).norm() - s.radius);
  for (const auto& b : world.boxes) best = std::min(best, box_distance(b, p));
  return best;
}

DepthImage render_depth(const World& world, const RigidTransform& T_wc,
                        const CameraIntrinsics& K) {
  DepthImage img(K, T_wc);
  const Mat3& R = T_wc.rotation();
  const Vec3& o = T_wc.translation();
  for (int v = 0; v < K.height; ++v) {
    for (int u = 0; u < K.width; ++u) {
      // Unit z-component in the camera frame, so the ray parameter is z-depth.
      const Vec3 d_cam((u + 0.5 - K.cx) / K.fx, (v + 0.5 - K.cy) / K.fy, 1.0);
      const double t = cast_ray(world, o, R * d_cam);
      if (std::isfinite(t)) img.set(u, v, static_cast<float>(std::clamp(t, K.d_min, K.d_max)));
    }
  }
  return img;
}

bool feature_visible(const World& world, const RigidTransform& T_wc, const CameraIntrinsics& K,
                     const Vec3& p_world) {
  const Vec3 p_cam = T_wc.inverse().apply(p_world);
  if (!is_visible(K, p_cam)) return false;
  const Vec3& o = T_wc.translation();
  const Vec3 d = p_world - o;
  const double len = d.norm();
  const double t = cast_ray(world, o, d / len);
  return t >= len - kOcclusionTolerance;
}

int discover_features(const World& world, const RigidTransform& T_wc, const CameraIntrinsics& K,
                      FeatureMap& discovered) {
  int added = 0;
  for (const auto& f : world.features) {
    if (discovered.contains(f.id)) continue;
    if (!feature_visible(world, T_wc, K, f.position)) continue;
    discovered.add(f.id, f.position);
    ++added;
  }
  return added;
}

int count_visible_features(const World& world, const RigidTransform& T_wc,
                           const CameraIntrinsics& K) {
  int n = 0;
  for (const auto& f : world.features) n += feature_visible(world, T_wc, K, f.position) ? 1 : 0;
  return n;
}

void generate_surface_features(World& world, const std::vector<SurfaceDensity>& recipe,
                               std::uint64_t seed, int first_id) {
  constexpr double kLift = 0.01;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int id = first_id;
  std::vector<Vec3> points;

  for (const auto& item : recipe) {
    if (item.density <= 0.0) continue;
    if (item.is_sphere) {
      const Sphere& s = world.spheres.at(item.index);
      const double area = 4.0 * std::numbers::pi * s.radius * s.radius;
      const int n = static_cast<int>(std::lround(item.density * area));
      for (int i = 0; i < n; ++i) {
        const double z = 2.0 * unit(rng) - 1.0;
        const double phi = 2.0 * std::numbers::pi * unit(rng);
        const double rxy = std::sqrt(std::max(0.0, 1.0 - z * z));
        const Vec3 dir(rxy * std::cos(phi), rxy * std::sin(phi), z);
        points.push_back(s.center + (s.radius + kLift) * dir);
      }
    } else {
      const Box& b = world.boxes.at(item.index);
      const Vec3 ext = b.max - b.min;
      for (int axis = 0; axis < 3; ++axis) {
        const int i1 = (axis + 1) % 3;
        const int i2 = (axis + 2) % 3;
        const double area = ext[i1] * ext[i2];
        const int n = static_cast<int>(std::lround(item.density * area));
        for (int side = 0; side < 2; ++side) {
          for (int k = 0; k < n; ++k) {
            Vec3 p;
            p[axis] = side == 0 ? b.min[axis] - kLift : b.max[axis] + kLift;
            p[i1] = b.min[i1] + ext[i1] * unit(rng);
            p[i2] = b.min[i2] + ext[i2] * unit(rng);
            points.push_back(p);
          }
        }
      }
    }
  }
  for (const Vec3& p : points) {
    if (obstacle_distance(world, p) < 0.5 * kLift) continue;
    world.features.add(id++, p);
  }
}

}  // namespace pap::sim
