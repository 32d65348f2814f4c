#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "pap/polynomial.hpp"

using namespace pap;

namespace {

Polynomial from_roots(std::initializer_list<double> roots, double scale = 1.0) {
  Polynomial p;
  p.c[0] = scale;
  for (double r : roots) {
    Polynomial f;
    f.degree = 1;
    f.c[0] = -r;
    f.c[1] = 1.0;
    p = p * f;
  }
  return p;
}

// Earliest sample with p < 0 on a fine grid.
std::optional<double> dense_first_negative(const Polynomial& p, double t0, double t1, int n) {
  for (int i = 0; i <= n; ++i) {
    const double t = t0 + (t1 - t0) * i / n;
    if (p(t) < 0.0) return t;
  }
  return std::nullopt;
}

}  // namespace

TEST(Polynomial, Arithmetic) {
  const Polynomial p = from_roots({1.0, -2.0});  // t^2 + t - 2
  EXPECT_EQ(p.degree, 2);
  EXPECT_DOUBLE_EQ(p(3.0), 10.0);
  EXPECT_DOUBLE_EQ(p.derivative()(3.0), 7.0);
  EXPECT_DOUBLE_EQ((p + (-1.0) * p)(5.0), 0.0);
  EXPECT_DOUBLE_EQ((p * p)(2.0), 16.0);
}

TEST(FirstNegative, PositiveEverywhere) {
  Polynomial p;
  p.degree = 2;
  p.c = {1.0, 0.0, 1.0};
  EXPECT_FALSE(first_negative(p, -5.0, 5.0).has_value());
}

TEST(FirstNegative, SimpleRoots) {
  // Negative on (1, 2) and beyond 3.
  const Polynomial p = from_roots({1.0, 2.0, 3.0}, -1.0);
  const auto t = first_negative(p, 0.0, 4.0, 1e-9);
  ASSERT_TRUE(t.has_value());
  EXPECT_NEAR(*t, 1.0, 1e-8);
  EXPECT_LE(*t, 1.0);
  const auto t2 = first_negative(p, 2.0, 4.0, 1e-9);
  ASSERT_TRUE(t2.has_value());
  EXPECT_NEAR(*t2, 3.0, 1e-8);
}

TEST(FirstNegative, TangentRootIsNotNegative) {
  const Polynomial p = from_roots({1.5, 1.5});
  EXPECT_FALSE(first_negative(p, 0.0, 3.0).has_value());
}

TEST(FirstNegative, NegativeAtStart) {
  const Polynomial p = from_roots({2.0});  // t - 2
  const auto t = first_negative(p, 0.0, 1.0);
  ASSERT_TRUE(t.has_value());
  EXPECT_NEAR(*t, 0.0, 1e-6);
}

TEST(FirstNegative, MatchesDenseSampling) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  int agree = 0;
  for (int i = 0; i < 300; ++i) {
    Polynomial p;
    p.degree = 5;
    for (int k = 0; k <= 5; ++k) p.c[k] = U(rng);
    p.c[0] = std::abs(p.c[0]) + 0.05;  // start inside
    const auto exact = first_negative(p, 0.0, 2.0, 1e-9);
    const auto dense = dense_first_negative(p, 0.0, 2.0, 200000);
    ASSERT_EQ(exact.has_value(), dense.has_value()) << "case " << i;
    if (exact) {
      EXPECT_LE(*exact, *dense + 1e-9);
      EXPECT_NEAR(*exact, *dense, 2e-5);
      // Non-negative everywhere before the reported time.
      for (int k = 0; k < 100; ++k) EXPECT_GE(p(*exact * k / 100.0), -1e-12);
    }
    ++agree;
  }
  EXPECT_EQ(agree, 300);
}
