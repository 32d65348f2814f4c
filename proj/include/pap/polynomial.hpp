#pragma once

#include <array>
#include <optional>

namespace pap {

/// Scalar polynomial of degree <= 10 in the power basis, sum c[i] t^i.
struct Polynomial {
  static constexpr int kMaxDegree = 10;
  std::array<double, kMaxDegree + 1> c{};
  int degree = 0;

  double operator()(double t) const;
  Polynomial derivative() const;
};

Polynomial operator+(const Polynomial& a, const Polynomial& b);
Polynomial operator*(const Polynomial& a, const Polynomial& b);
Polynomial operator*(double s, const Polynomial& p);

/// Earliest time in [t0, t1] at which p(t) < 0, located to within `tol` by
/// Bernstein subdivision: the returned time is the left end of the first
/// sub-interval of width < tol on which negativity was detected (so p >= 0
/// holds up to it). nullopt when p >= 0 on the whole interval.
std::optional<double> first_negative(const Polynomial& p, double t0, double t1,
                                     double tol = 1e-6);

}  // namespace pap
