#include "pap/pyramid_collision.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pap {

namespace {

constexpr double kExitTolerance = 1e-6;  // s
constexpr int kMaxCoverageSteps = 64;

}  // namespace

void CollisionConfig::validate() const {
  if (!(vehicle_radius > 0.0)) throw std::invalid_argument("vehicle radius must be positive");
  if (!(unseen_margin > vehicle_radius)) throw std::invalid_argument("need l > r");
  if (max_pyramids < 1) throw std::invalid_argument("pyramid budget must be >= 1");
  if (spiral_stride < 1) throw std::invalid_argument("spiral stride must be >= 1");
}

// ---------------------------------------------------------------------------
// Pyramid

Pyramid::Pyramid(const CameraIntrinsics& K, const RigidTransform& T_wc, double u_lo, double u_hi,
                 double v_lo, double v_hi, double base_depth, double radius)
    : u_lo_(u_lo),
      u_hi_(u_hi),
      v_lo_(v_lo),
      v_hi_(v_hi),
      base_depth_(base_depth),
      radius_(radius),
      T_wc_(T_wc),
      T_cw_(T_wc.inverse()) {
  auto lateral = [radius](const Vec3& n) { return HalfSpace{n.normalized(), -radius}; };
  faces_[0] = lateral({K.fx, 0.0, -(u_lo - K.cx)});
  faces_[1] = lateral({-K.fx, 0.0, u_hi - K.cx});
  faces_[2] = lateral({0.0, K.fy, -(v_lo - K.cy)});
  faces_[3] = lateral({0.0, -K.fy, v_hi - K.cy});
  faces_[4] = HalfSpace{{0.0, 0.0, -1.0}, base_depth - radius};

  // The interior is widest at the base plane; test the inscribed slab there.
  const double z = base_depth - radius;
  auto spans = [&](double lo, double hi, double c, double f) {
    const double a_lo = (lo - c) / f;
    const double a_hi = (hi - c) / f;
    return z * (a_hi - a_lo) >=
           radius * (std::sqrt(1.0 + a_lo * a_lo) + std::sqrt(1.0 + a_hi * a_hi));
  };
  empty_ = !(z > 0.0 && u_hi > u_lo && v_hi > v_lo && spans(u_lo, u_hi, K.cx, K.fx) &&
             spans(v_lo, v_hi, K.cy, K.fy));
}

double Pyramid::margin(const Vec3& p_cam) const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& f : faces_) m = std::min(m, f.eval(p_cam));
  return m;
}

// ---------------------------------------------------------------------------
// Pixel search

float effective_depth(const DepthImage& depth, int u, int v) {
  const float d = depth.at(u, v);
  return std::isnan(d) ? static_cast<float>(depth.intrinsics().d_min) : d;
}

PixelIndex nearest_pixel(const DepthImage& depth, const Vec3& p_world) {
  const CameraIntrinsics& K = depth.intrinsics();
  const PixelCoord b = project(K, depth.world_to_camera().apply(p_world));
  const double u = std::clamp(b.u, 0.0, static_cast<double>(K.width));
  const double v = std::clamp(b.v, 0.0, static_cast<double>(K.height));
  const int u0 = std::clamp(static_cast<int>(std::floor(u)), 0, K.width - 1);
  const int v0 = std::clamp(static_cast<int>(std::floor(v)), 0, K.height - 1);
  if (depth.valid(u0, v0)) return {u0, v0};

  // Square rings around (u0, v0); a ring at Chebyshev radius k cannot hold a
  // pixel center closer than k - 1 to the query point.
  double best = std::numeric_limits<double>::infinity();
  std::optional<PixelIndex> found;
  const int max_ring = std::max(K.width, K.height);
  for (int k = 1; k <= max_ring; ++k) {
    if (found && k - 1 > best) break;
    for (int dv = -k; dv <= k; ++dv) {
      const int step = (dv == -k || dv == k) ? 1 : 2 * k;
      for (int du = -k; du <= k; du += step) {
        const int pu = u0 + du;
        const int pv = v0 + dv;
        if (pu < 0 || pv < 0 || pu >= K.width || pv >= K.height) continue;
        if (!depth.valid(pu, pv)) continue;
        const double d = std::hypot(pu + 0.5 - u, pv + 0.5 - v);
        if (d < best) {
          best = d;
          found = PixelIndex{pu, pv};
        }
      }
    }
  }
  if (!found) throw NoFreeSpaceError("depth image has no valid pixels");
  return *found;
}

// ---------------------------------------------------------------------------
// Range-minimum tables

DepthRangeMin::DepthRangeMin(const DepthImage& depth)
    : width_(depth.width()), height_(depth.height()) {
  const int longest = std::max(width_, height_);
  log2_.assign(longest + 1, 0);
  for (int i = 2; i <= longest; ++i) log2_[i] = log2_[i / 2] + 1;

  const auto n = static_cast<std::size_t>(width_) * height_;
  std::vector<float> base(n), base_t(n);
  for (int v = 0; v < height_; ++v) {
    for (int u = 0; u < width_; ++u) {
      const float d = effective_depth(depth, u, v);
      base[static_cast<std::size_t>(v) * width_ + u] = d;
      base_t[static_cast<std::size_t>(u) * height_ + v] = d;
    }
  }
  auto build = [](std::vector<std::vector<float>>& levels, std::vector<float> level0,
                  int runs, int len, int max_level) {
    levels.clear();
    levels.push_back(std::move(level0));
    for (int k = 1; k <= max_level; ++k) {
      const std::vector<float>& prev = levels.back();
      std::vector<float> cur(prev.size(), 0.0f);
      const int half = 1 << (k - 1);
      for (int r = 0; r < runs; ++r) {
        const std::size_t off = static_cast<std::size_t>(r) * len;
        for (int i = 0; i + (1 << k) <= len; ++i) {
          cur[off + i] = std::min(prev[off + i], prev[off + i + half]);
        }
      }
      levels.push_back(std::move(cur));
    }
  };
  build(rows_, std::move(base), height_, width_, log2_[width_]);
  build(cols_, std::move(base_t), width_, height_, log2_[height_]);
}

float DepthRangeMin::row_min(int v, int u0, int u1) const {
  const int k = log2_[u1 - u0 + 1];
  const std::size_t off = static_cast<std::size_t>(v) * width_;
  return std::min(rows_[k][off + u0], rows_[k][off + u1 - (1 << k) + 1]);
}

float DepthRangeMin::col_min(int u, int v0, int v1) const {
  const int k = log2_[v1 - v0 + 1];
  const std::size_t off = static_cast<std::size_t>(u) * height_;
  return std::min(cols_[k][off + v0], cols_[k][off + v1 - (1 << k) + 1]);
}

// ---------------------------------------------------------------------------
// Inflation

std::optional<Pyramid> inflate_pyramid(const DepthImage& depth, PixelIndex seed,
                                       const CollisionConfig& config) {
  return inflate_pyramid(depth, DepthRangeMin(depth), seed, config);
}

std::optional<Pyramid> inflate_pyramid(const DepthImage& depth, const DepthRangeMin& mins,
                                       PixelIndex seed, const CollisionConfig& config) {
  const int W = depth.width();
  const int H = depth.height();
  if (seed.u < 0 || seed.v < 0 || seed.u >= W || seed.v >= H) return std::nullopt;

  const double base = std::min<double>(effective_depth(depth, seed.u, seed.v),
                                       config.unseen_margin);
  const auto blocked = [base](float d) { return static_cast<double>(d) < base; };

  int u_lo = seed.u, u_hi = seed.u, v_lo = seed.v, v_hi = seed.v;
  std::array<bool, 4> frozen{};  // left, right, top, bottom
  const int stride = config.spiral_stride;

  // Each side tries to advance by `stride` pixels, falling back to a single
  // pixel, and freezes once even that would intrude into occupied space.
  auto grow = [&](int side) {
    for (int step : {stride, 1}) {
      switch (side) {
        case 0: {
          const int lo = std::max(0, u_lo - step);
          if (lo == u_lo) return false;
          bool ok = true;
          for (int u = lo; u < u_lo && ok; ++u) ok = !blocked(mins.col_min(u, v_lo, v_hi));
          if (ok) { u_lo = lo; return true; }
          break;
        }
        case 1: {
          const int hi = std::min(W - 1, u_hi + step);
          if (hi == u_hi) return false;
          bool ok = true;
          for (int u = u_hi + 1; u <= hi && ok; ++u) ok = !blocked(mins.col_min(u, v_lo, v_hi));
          if (ok) { u_hi = hi; return true; }
          break;
        }
        case 2: {
          const int lo = std::max(0, v_lo - step);
          if (lo == v_lo) return false;
          bool ok = true;
          for (int v = lo; v < v_lo && ok; ++v) ok = !blocked(mins.row_min(v, u_lo, u_hi));
          if (ok) { v_lo = lo; return true; }
          break;
        }
        default: {
          const int hi = std::min(H - 1, v_hi + step);
          if (hi == v_hi) return false;
          bool ok = true;
          for (int v = v_hi + 1; v <= hi && ok; ++v) ok = !blocked(mins.row_min(v, u_lo, u_hi));
          if (ok) { v_hi = hi; return true; }
          break;
        }
      }
      if (step == 1) break;
    }
    return false;
  };

  while (!(frozen[0] && frozen[1] && frozen[2] && frozen[3])) {
    for (int side = 0; side < 4; ++side) {
      if (!frozen[side] && !grow(side)) frozen[side] = true;
    }
  }

  Pyramid pyr(depth.intrinsics(), depth.capture_pose(), u_lo, u_hi + 1.0, v_lo, v_hi + 1.0, base,
              config.vehicle_radius);
  if (pyr.empty()) return std::nullopt;
  return pyr;
}

// ---------------------------------------------------------------------------
// Trajectory containment

namespace {

// Trajectory coefficients in the capture frame.
std::array<Vec3, 6> camera_frame_coefficients(const QuinticTrajectory& traj,
                                              const RigidTransform& T_cw) {
  std::array<Vec3, 6> out;
  const auto& c = traj.coefficients();
  for (int i = 0; i < 6; ++i) out[i] = T_cw.rotation() * c[i];
  out[0] += T_cw.translation();
  return out;
}

Polynomial face_polynomial(const std::array<Vec3, 6>& cc, const HalfSpace& h) {
  Polynomial p;
  p.degree = 5;
  for (int i = 0; i < 6; ++i) p.c[i] = h.normal.dot(cc[i]);
  p.c[0] += h.offset;
  return p;
}

// A convex region described by polynomial constraints g(t) >= 0.
struct Region {
  std::vector<Polynomial> constraints;
  const Pyramid* pyramid = nullptr;

  bool contains(double t) const {
    for (const auto& g : constraints) {
      if (g(t) < 0.0) return false;
    }
    return true;
  }
  // Earliest exit after t; nullopt if the trajectory stays inside until t1.
  std::optional<double> exit_after(double t, double t1) const {
    std::optional<double> exit;
    for (const auto& g : constraints) {
      if (auto e = first_negative(g, t, exit ? *exit : t1, kExitTolerance)) exit = e;
    }
    return exit;
  }
};

Region pyramid_region(const QuinticTrajectory& traj, const Pyramid& pyr) {
  Region r;
  r.pyramid = &pyr;
  const auto polys = face_polynomials(traj, pyr);
  r.constraints.assign(polys.begin(), polys.end());
  return r;
}

Region ball_region(const QuinticTrajectory& traj, const RigidTransform& T_cw, double radius) {
  const auto cc = camera_frame_coefficients(traj, T_cw);
  Polynomial g;
  g.degree = 0;
  g.c[0] = radius * radius;
  for (int axis = 0; axis < 3; ++axis) {
    Polynomial s;
    s.degree = 5;
    for (int i = 0; i < 6; ++i) s.c[i] = cc[i](axis);
    g = g + (-1.0) * (s * s);
  }
  Region r;
  r.constraints.push_back(g);
  return r;
}

}  // namespace

std::array<Polynomial, 5> face_polynomials(const QuinticTrajectory& traj, const Pyramid& pyr) {
  const auto cc = camera_frame_coefficients(traj, pyr.world_to_camera());
  std::array<Polynomial, 5> out;
  for (int i = 0; i < 5; ++i) out[i] = face_polynomial(cc, pyr.faces()[i]);
  return out;
}

SegmentCheck segment_inside_pyramid(const QuinticTrajectory& traj, double t0, double t1,
                                    const Pyramid& pyr) {
  const Region r = pyramid_region(traj, pyr);
  if (auto e = r.exit_after(t0, t1)) return {false, *e};
  return {true, t1};
}

// ---------------------------------------------------------------------------
// Store and coverage

PyramidStore::PyramidStore(const DepthImage& depth, const CollisionConfig& config,
                           const RecentReturns& recent)
    : depth_(std::make_shared<const DepthImage>(depth)), config_(config), mins_(*depth_) {
  config_.validate();
  const CameraIntrinsics& K = depth_->intrinsics();
  double closest = std::numeric_limits<double>::infinity();
  for (int v = 0; v < K.height; ++v) {
    const double y = (v + 0.5 - K.cy) / K.fy;
    for (int u = 0; u < K.width; ++u) {
      const double x = (u + 0.5 - K.cx) / K.fx;
      const double d = effective_depth(*depth_, u, v) * std::sqrt(1.0 + x * x + y * y);
      closest = std::min(closest, d);
    }
  }
  const Vec3 c = depth_->capture_pose().translation();
  for (const Vec3& p : recent.points) closest = std::min(closest, (p - c).norm() - recent.slack);
  departure_radius_ = std::min(closest - config_.vehicle_radius,
                               config_.unseen_margin - config_.vehicle_radius);
}

const Pyramid* PyramidStore::pyramid_for_seed(PixelIndex seed) {
  if (auto it = cache_.find(seed); it != cache_.end()) return it->second;
  ++inflations_;
  const Pyramid* out = nullptr;
  if (auto pyr = inflate_pyramid(*depth_, mins_, seed, config_)) {
    pyramids_.push_back(std::make_unique<Pyramid>(*pyr));
    out = pyramids_.back().get();
  }
  cache_.emplace(seed, out);
  return out;
}

CollisionResult collision_free(const QuinticTrajectory& traj, PyramidStore& store) {
  CollisionResult result;
  const DepthImage& depth = store.depth();
  const RigidTransform& T_cw = depth.world_to_camera();
  const double T = traj.duration();

  std::vector<Region> regions;
  if (store.departure_radius() > 0.0) {
    regions.push_back(ball_region(traj, T_cw, store.departure_radius()));
  }

  auto seed_in = [&](PyramidStore& st, const Vec3& p) -> const Pyramid* {
    if (!(st.depth().world_to_camera().apply(p).z() > 0.0)) return nullptr;
    PixelIndex seed;
    try {
      seed = nearest_pixel(st.depth(), p);
    } catch (const NoFreeSpaceError&) {
      return nullptr;
    }
    const Pyramid* pyr = st.pyramid_for_seed(seed);
    if (pyr == nullptr) return nullptr;
    for (const auto& r : regions) {
      if (r.pyramid == pyr) return nullptr;  // no new coverage available
    }
    return pyr;
  };
  auto seed_at = [&](double t) -> const Pyramid* {
    const Vec3 p = traj.position(t);
    if (const Pyramid* pyr = seed_in(store, p); pyr != nullptr && pyr->contains(p)) return pyr;
    for (const auto& kf : store.keyframes()) {
      if (const Pyramid* pyr = seed_in(*kf, p); pyr != nullptr && pyr->contains(p)) return pyr;
    }
    return seed_in(store, p);
  };
  int used = 0;
  auto add_pyramid = [&](const Pyramid* pyr) {
    regions.push_back(pyramid_region(traj, *pyr));
    result.pyramids.push_back(pyr);
    ++used;
  };

  if (const Pyramid* first = seed_at(T)) add_pyramid(first);

  double t = 0.0;
  for (int step = 0; step < kMaxCoverageSteps; ++step) {
    double reach = t;
    for (const auto& r : regions) {
      if (!r.contains(t)) continue;
      const auto exit = r.exit_after(t, T);
      if (!exit) {
        result.collision_free = true;
        result.used_departure_ball = result.used_departure_ball || r.pyramid == nullptr;
        return result;
      }
      if (r.pyramid == nullptr && *exit > t) result.used_departure_ball = true;
      reach = std::max(reach, *exit);
    }
    if (reach > t) {
      t = reach;
      continue;
    }
    if (used >= store.config().max_pyramids) return result;
    const Pyramid* next = seed_at(t);
    if (next == nullptr) return result;
    add_pyramid(next);
    const Region& fresh = regions.back();
    if (!fresh.contains(t)) return result;
  }
  return result;
}

}  // namespace pap
