#pragma once

#include <array>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "pap/camera.hpp"
#include "pap/polynomial.hpp"
#include "pap/trajectory.hpp"

namespace pap {

struct CollisionConfig {
  double vehicle_radius = 0.3;  // r (m)
  double unseen_margin = 6.0;   // l (m)
  int max_pyramids = 4;         // per candidate
  int spiral_stride = 1;        // pixels added per side per ring

  void validate() const;
};

class NoFreeSpaceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PixelIndex {
  int u = 0;
  int v = 0;
  auto operator<=>(const PixelIndex&) const = default;
};

/// g(p) = normal . p + offset >= 0 in the camera frame.
struct HalfSpace {
  Vec3 normal = Vec3::Zero();
  double offset = 0.0;
  double eval(const Vec3& p) const { return normal.dot(p) + offset; }
};

/// Free-space pyramid with its apex at the camera center. The expanded
/// pyramid spans the continuous pixel rectangle [u_lo, u_hi] x [v_lo, v_hi]
/// out to base_depth; the usable interior is that set shrunk by the vehicle
/// radius on all five faces.
class Pyramid {
 public:
  Pyramid(const CameraIntrinsics& K, const RigidTransform& T_wc, double u_lo, double u_hi,
          double v_lo, double v_hi, double base_depth, double radius);

  double u_lo() const { return u_lo_; }
  double u_hi() const { return u_hi_; }
  double v_lo() const { return v_lo_; }
  double v_hi() const { return v_hi_; }
  double base_depth() const { return base_depth_; }
  double radius() const { return radius_; }
  const RigidTransform& capture_pose() const { return T_wc_; }
  const RigidTransform& world_to_camera() const { return T_cw_; }

  /// Four lateral faces (left, right, top, bottom) then the base plane, all
  /// already offset inward by the radius.
  const std::array<HalfSpace, 5>& faces() const { return faces_; }

  /// True when the shrunk interior has no points.
  bool empty() const { return empty_; }

  /// Smallest face value (>= 0 inside), camera-frame point.
  double margin(const Vec3& p_cam) const;
  bool contains_camera_point(const Vec3& p_cam) const { return margin(p_cam) >= 0.0; }
  bool contains(const Vec3& p_world) const { return contains_camera_point(T_cw_.apply(p_world)); }

 private:
  double u_lo_, u_hi_, v_lo_, v_hi_;
  double base_depth_;
  double radius_;
  RigidTransform T_wc_;
  RigidTransform T_cw_;
  std::array<HalfSpace, 5> faces_;
  bool empty_ = true;
};

/// Depth used for free-space reasoning: NaN pixels count as an obstacle at d_min.
float effective_depth(const DepthImage& depth, int u, int v);

/// Valid pixel whose center is closest to the (image-clamped) projection of
/// p_world. Throws BehindCameraError if p_world is not in front of the capture
/// pose and NoFreeSpaceError if the image has no valid pixel.
PixelIndex nearest_pixel(const DepthImage& depth, const Vec3& p_world);

/// Range-minimum tables over a depth image for O(1) row- and column-segment
/// minimum queries during pyramid inflation.
class DepthRangeMin {
 public:
  explicit DepthRangeMin(const DepthImage& depth);
  /// min over columns [u0, u1] of row v.
  float row_min(int v, int u0, int u1) const;
  /// min over rows [v0, v1] of column u.
  float col_min(int u, int v0, int v1) const;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::vector<float>> rows_;  // level k: mins of 2^k runs along rows
  std::vector<std::vector<float>> cols_;
  std::vector<int> log2_;
};

/// Grows the largest pixel rectangle around `seed` whose depths are all at
/// least the seed's depth (capped at l), then shrinks it by the vehicle radius.
/// nullopt when the shrunk pyramid is empty.
std::optional<Pyramid> inflate_pyramid(const DepthImage& depth, PixelIndex seed,
                                       const CollisionConfig& config);
std::optional<Pyramid> inflate_pyramid(const DepthImage& depth, const DepthRangeMin& mins,
                                       PixelIndex seed, const CollisionConfig& config);

struct SegmentCheck {
  bool inside = true;
  double exit_time = 0.0;  // earliest time the trajectory leaves (if !inside)
};

/// Per-face quintic g_i(t) for the trajectory expressed in the capture frame.
std::array<Polynomial, 5> face_polynomials(const QuinticTrajectory& traj, const Pyramid& pyr);

/// Whether s(t) stays in the shrunk pyramid for all t in [t0, t1].
SegmentCheck segment_inside_pyramid(const QuinticTrajectory& traj, double t0, double t1,
                                    const Pyramid& pyr);

/// Obstacle points remembered from earlier frames (world frame). Each point
/// stands for obstacles anywhere within `slack` of it.
struct RecentReturns {
  std::span<const Vec3> points;
  double slack = 0.0;
};

/// Pyramids generated from one depth image, memoized by seed pixel so that
/// inflation work is shared across the candidates of one replan cycle. The
/// store copies the image it was built for.
class PyramidStore {
 public:
  /// `recent` only tightens the departure ball.
  PyramidStore(const DepthImage& depth, const CollisionConfig& config,
               const RecentReturns& recent = {});

  const DepthImage& depth() const { return *depth_; }
  const CollisionConfig& config() const { return config_; }

  /// Memoized inflate_pyramid; the returned pointer is stable for the
  /// lifetime of the store.
  const Pyramid* pyramid_for_seed(PixelIndex seed);

  /// Radius of the ball around the capture position that keeps at least r
  /// from every depth return (current and recent) and stays inside l - r
  /// (<= 0 if none).
  double departure_radius() const { return departure_radius_; }

  std::size_t inflations() const { return inflations_; }
  std::size_t size() const { return pyramids_.size(); }

  /// Stores of earlier frames, newest first. Their pyramids remain valid free
  /// space in a static world and are tried when this frame's pyramids do not
  /// cover a point.
  void set_keyframes(std::vector<std::shared_ptr<PyramidStore>> keyframes) {
    keyframes_ = std::move(keyframes);
  }
  const std::vector<std::shared_ptr<PyramidStore>>& keyframes() const { return keyframes_; }

 private:
  std::shared_ptr<const DepthImage> depth_;
  CollisionConfig config_;
  DepthRangeMin mins_;
  double departure_radius_ = 0.0;
  std::map<PixelIndex, const Pyramid*> cache_;
  std::vector<std::unique_ptr<Pyramid>> pyramids_;
  std::size_t inflations_ = 0;
  std::vector<std::shared_ptr<PyramidStore>> keyframes_;
};

struct CollisionResult {
  bool collision_free = false;
  std::vector<const Pyramid*> pyramids;  // pyramids covering the trajectory
  bool used_departure_ball = false;
};

/// Covers the trajectory by the departure ball and a chain of pyramids: the
/// first seeded at the pixel nearest s(T), further ones seeded at the pixel
/// nearest the point where coverage runs out, falling back to the store's
/// keyframes when the current frame offers nothing there.
CollisionResult collision_free(const QuinticTrajectory& traj, PyramidStore& store);

}  // namespace pap
