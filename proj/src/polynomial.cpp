#include "pap/polynomial.hpp"

#include <algorithm>

namespace pap {

double Polynomial::operator()(double t) const {
  double v = 0.0;
  for (int i = degree; i >= 0; --i) v = v * t + c[i];
  return v;
}

Polynomial Polynomial::derivative() const {
  Polynomial d;
  d.degree = std::max(0, degree - 1);
  for (int i = 1; i <= degree; ++i) d.c[i - 1] = i * c[i];
  return d;
}

Polynomial operator+(const Polynomial& a, const Polynomial& b) {
  Polynomial r;
  r.degree = std::max(a.degree, b.degree);
  for (int i = 0; i <= r.degree; ++i) r.c[i] = a.c[i] + b.c[i];
  return r;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  Polynomial r;
  r.degree = a.degree + b.degree;
  for (int i = 0; i <= a.degree; ++i) {
    for (int j = 0; j <= b.degree; ++j) r.c[i + j] += a.c[i] * b.c[j];
  }
  return r;
}

Polynomial operator*(double s, const Polynomial& p) {
  Polynomial r = p;
  for (int i = 0; i <= r.degree; ++i) r.c[i] *= s;
  return r;
}

namespace {

using Coeffs = std::array<double, Polynomial::kMaxDegree + 1>;

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Bernstein coefficients of p restricted to [t0, t1].
Coeffs to_bernstein(const Polynomial& p, double t0, double t1) {
  const int n = p.degree;
  // Taylor shift to t0, then scale to the unit interval.
  Coeffs q = p.c;
  for (int k = 0; k < n; ++k) {
    for (int i = n - 1; i >= k; --i) q[i] += t0 * q[i + 1];
  }
  const double h = t1 - t0;
  double hp = 1.0;
  for (int i = 0; i <= n; ++i) {
    q[i] *= hp;
    hp *= h;
  }
  Coeffs b{};
  for (int k = 0; k <= n; ++k) {
    double s = 0.0;
    for (int i = 0; i <= k; ++i) s += binomial(k, i) / binomial(n, i) * q[i];
    b[k] = s;
  }
  return b;
}

// de Casteljau split at the midpoint.
void split(const Coeffs& b, int n, Coeffs& left, Coeffs& right) {
  Coeffs w = b;
  left[0] = w[0];
  right[n] = w[n];
  for (int r = 1; r <= n; ++r) {
    for (int i = 0; i <= n - r; ++i) w[i] = 0.5 * (w[i] + w[i + 1]);
    left[r] = w[0];
    right[n - r] = w[n - r];
  }
}

std::optional<double> search(const Coeffs& b, int n, double a, double e, double tol) {
  double lo = b[0];
  double hi = b[0];
  for (int i = 1; i <= n; ++i) {
    lo = std::min(lo, b[i]);
    hi = std::max(hi, b[i]);
  }
  if (lo >= 0.0) return std::nullopt;
  if (b[0] < 0.0 || hi < 0.0) return a;

  Coeffs left{}, right{};
  split(b, n, left, right);
  if (e - a < tol) {
    // Undecided at resolution: only the sampled end and midpoint values count.
    if (b[n] < 0.0 || right[0] < 0.0) return a;
    return std::nullopt;
  }
  const double m = 0.5 * (a + e);
  if (auto r = search(left, n, a, m, tol)) return r;
  return search(right, n, m, e, tol);
}

}  // namespace

std::optional<double> first_negative(const Polynomial& p, double t0, double t1, double tol) {
  if (t1 < t0) return std::nullopt;
  if (t1 == t0) return p(t0) < 0.0 ? std::optional<double>(t0) : std::nullopt;
  return search(to_bernstein(p, t0, t1), p.degree, t0, t1, tol);
}

}  // namespace pap
