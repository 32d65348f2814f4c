#include "pap/camera.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace pap {

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0 && fy > 0.0)) throw std::invalid_argument("focal lengths must be positive");
  if (width <= 0 || height <= 0) throw std::invalid_argument("image size must be positive");
  if (!(cx > 0.0 && cx < width && cy > 0.0 && cy < height)) {
    throw std::invalid_argument("principal point must lie inside the image");
  }
  if (!(d_min > 0.0 && d_max > d_min)) throw std::invalid_argument("need 0 < d_min < d_max");
  if (!(t_exp >= 0.0)) throw std::invalid_argument("exposure time must be >= 0");
}

PixelCoord project(const CameraIntrinsics& K, const Vec3& p) {
  if (!(p.z() > 0.0)) throw BehindCameraError("point is not in front of the camera");
  return {K.fx * p.x() / p.z() + K.cx, K.fy * p.y() / p.z() + K.cy};
}

Vec3 unproject(const CameraIntrinsics& K, const PixelCoord& b, double depth) {
  return {(b.u - K.cx) / K.fx * depth, (b.v - K.cy) / K.fy * depth, depth};
}

bool is_visible(const CameraIntrinsics& K, const Vec3& p) {
  if (!(p.z() >= K.d_min && p.z() <= K.d_max)) return false;
  const PixelCoord b = project(K, p);
  return b.u >= 0.0 && b.u <= K.width && b.v >= 0.0 && b.v <= K.height;
}

RigidTransform camera_pose_from_body(const RigidTransform& T_wb, const RigidTransform& T_bc) {
  return compose(T_wb, T_bc).inverse();
}

RigidTransform forward_camera_mount(const Vec3& offset) {
  Mat3 R_bc;
  R_bc << 0.0, 0.0, 1.0,
          -1.0, 0.0, 0.0,
          0.0, -1.0, 0.0;
  return {R_bc, offset};
}

DepthImage::DepthImage(const CameraIntrinsics& K, const RigidTransform& T_wc, float fill)
    : intrinsics_(K),
      T_wc_(T_wc),
      T_cw_(T_wc.inverse()),
      depths_(static_cast<std::size_t>(K.width) * static_cast<std::size_t>(K.height), fill) {
  K.validate();
}

bool DepthImage::valid(int u, int v) const { return !std::isnan(at(u, v)); }

Vec3 DepthImage::pixel_point(int u, int v) const {
  return unproject(intrinsics_, {u + 0.5, v + 0.5}, at(u, v));
}

namespace {

static_assert(std::endian::native == std::endian::little,
              "depth image serialization assumes a little-endian host");

}  // namespace

void DepthImage::write(std::ostream& os) const {
  std::ostringstream header;
  header.precision(17);
  header << intrinsics_.width << ' ' << intrinsics_.height << ' ' << intrinsics_.fx << ' '
         << intrinsics_.fy << ' ' << intrinsics_.cx << ' ' << intrinsics_.cy << '\n';
  os << header.str();
  os.write(reinterpret_cast<const char*>(depths_.data()),
           static_cast<std::streamsize>(depths_.size() * sizeof(float)));
}

DepthImage DepthImage::read(std::istream& is, const CameraIntrinsics& base,
                            const RigidTransform& T_wc) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("depth image: missing header");
  std::istringstream header(line);
  CameraIntrinsics K = base;
  if (!(header >> K.width >> K.height >> K.fx >> K.fy >> K.cx >> K.cy)) {
    throw std::runtime_error("depth image: malformed header '" + line + "'");
  }
  DepthImage img(K, T_wc);
  is.read(reinterpret_cast<char*>(img.depths_.data()),
          static_cast<std::streamsize>(img.depths_.size() * sizeof(float)));
  if (is.gcount() != static_cast<std::streamsize>(img.depths_.size() * sizeof(float))) {
    throw std::runtime_error("depth image: truncated pixel data");
  }
  return img;
}

}  // namespace pap
