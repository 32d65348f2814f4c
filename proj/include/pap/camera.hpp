#pragma once

#include <iosfwd>
#include <limits>
#include <stdexcept>
#include <vector>

#include "pap/se3.hpp"

namespace pap {

class BehindCameraError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Pinhole intrinsics plus the exposure time and valid depth range of the
/// sensor. Pixel (i, j) covers [i, i+1) x [j, j+1); its center is (i+0.5, j+0.5).
struct CameraIntrinsics {
  double fx = 193.0;
  double fy = 193.0;
  double cx = 160.0;
  double cy = 120.0;
  int width = 320;
  int height = 240;
  double t_exp = 0.008;  // s
  double d_min = 0.3;    // m
  double d_max = 10.0;   // m

  /// Throws std::invalid_argument on violated invariants.
  void validate() const;
};

struct PixelCoord {
  double u = 0.0;
  double v = 0.0;
};

/// Throws BehindCameraError when p.z() <= 0.
PixelCoord project(const CameraIntrinsics& K, const Vec3& p);
Vec3 unproject(const CameraIntrinsics& K, const PixelCoord& b, double depth);

/// Depth in range and projection inside the closed image rectangle.
bool is_visible(const CameraIntrinsics& K, const Vec3& p);

/// T^CW from the body pose T^WB and the camera mount T^BC.
RigidTransform camera_pose_from_body(const RigidTransform& T_wb, const RigidTransform& T_bc);

/// Forward-looking mount: camera z along body x, camera x along body -y,
/// camera y along body -z.
RigidTransform forward_camera_mount(const Vec3& offset = Vec3(0.1, 0.0, 0.0));

inline constexpr float kInvalidDepth = std::numeric_limits<float>::quiet_NaN();

/// Row-major grid of z-depths (m) captured at camera pose T^WC. Invalid or
/// no-return pixels hold NaN.
class DepthImage {
 public:
  DepthImage() = default;
  DepthImage(const CameraIntrinsics& K, const RigidTransform& T_wc, float fill = kInvalidDepth);

  const CameraIntrinsics& intrinsics() const { return intrinsics_; }
  const RigidTransform& capture_pose() const { return T_wc_; }  // T^WC
  const RigidTransform& world_to_camera() const { return T_cw_; }
  int width() const { return intrinsics_.width; }
  int height() const { return intrinsics_.height; }

  float at(int u, int v) const { return depths_[index(u, v)]; }
  void set(int u, int v, float depth) { depths_[index(u, v)] = depth; }
  bool valid(int u, int v) const;

  const std::vector<float>& data() const { return depths_; }

  /// Camera-frame point at pixel center (u, v) for the stored depth.
  Vec3 pixel_point(int u, int v) const;

  /// Header line "width height fx fy cx cy", then width*height little-endian
  /// float32 values in row-major order.
  void write(std::ostream& os) const;

  /// Reads the format produced by write(); the fields not stored in the header
  /// (exposure, depth range) come from `base`.
  static DepthImage read(std::istream& is, const CameraIntrinsics& base = {},
                         const RigidTransform& T_wc = {});

 private:
  std::size_t index(int u, int v) const {
    return static_cast<std::size_t>(v) * static_cast<std::size_t>(intrinsics_.width) +
           static_cast<std::size_t>(u);
  }

  CameraIntrinsics intrinsics_;
  RigidTransform T_wc_;
  RigidTransform T_cw_;
  std::vector<float> depths_;
};

}  // namespace pap
