#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "pap/camera.hpp"

namespace pap::verify {

struct CaseReport {
  std::string name;
  double value = 0.0;      // measured error (or violation count)
  double tolerance = 0.0;  // pass iff value < tolerance
  bool pass() const { return value < tolerance; }
};

struct SuiteReport {
  std::string suite;
  std::vector<CaseReport> cases;
  std::vector<std::string> notes;  // informational lines
  double seconds = 0.0;

  bool pass() const;
  /// Case with the largest value / tolerance ratio.
  const CaseReport* worst() const;
  void print(std::ostream& os) const;
};

using JacobianFn = std::function<Mat26(const Vec3&, const CameraIntrinsics&)>;

/// Analytic pose Jacobian vs finite differences on random points and intrinsics.
SuiteReport jacobian_suite(int points = 1000, std::uint64_t seed = 1, JacobianFn jacobian = {});

/// Predicted translational covariance vs Monte-Carlo Gauss-Newton solves on an
/// 8-feature fronto-parallel fixture, without blur and at t_exp = 8 ms.
SuiteReport covariance_suite(int trials = 10000, std::uint64_t seed = 1);

/// collision_free verdicts vs a dense-sampling point-cloud oracle.
SuiteReport collision_suite(int scenes = 500, int candidates = 20, std::uint64_t seed = 1);

/// Min-jerk boundary conditions, derivative consistency and flatness rates.
SuiteReport trajectory_suite(int draws = 10000, std::uint64_t seed = 1);

const std::vector<std::string>& suite_names();
/// Throws std::invalid_argument for unknown names.
SuiteReport run_suite(const std::string& name, std::uint64_t seed = 1);

}  // namespace pap::verify
