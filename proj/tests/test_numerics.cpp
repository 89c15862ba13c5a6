#include <gtest/gtest.h>

#include <cmath>

#include "stablab/errors.hpp"
#include "stablab/numerics.hpp"

using namespace stablab;

TEST(SafeguardedRoot, FindsCubeRoot) {
  auto f = [](double x) { return std::pair<double, double>{x * x * x - 2.0, 3.0 * x * x}; };
  EXPECT_NEAR(numerics::safeguarded_root(f, 0.0, 3.0), std::cbrt(2.0), 1e-14);
}

TEST(SafeguardedRoot, SurvivesUselessDerivative) {
  // A zero slope forces the bisection branch every time.
  auto f = [](double x) { return std::pair<double, double>{std::tanh(x - 0.3), 0.0}; };
  EXPECT_NEAR(numerics::safeguarded_root(f, -5.0, 5.0), 0.3, 1e-11);
}

TEST(SafeguardedRoot, RejectsMissingBracket) {
  auto f = [](double x) { return std::pair<double, double>{x * x + 1.0, 2.0 * x}; };
  EXPECT_THROW(numerics::safeguarded_root(f, -1.0, 1.0), BracketFailure);
}

TEST(Integrate, KnownIntegrals) {
  EXPECT_NEAR(numerics::integrate([](double x) { return std::exp(-x); }, 0.0, 5.0), 1.0 - std::exp(-5.0), 1e-14);
  EXPECT_NEAR(numerics::integrate([](double x) { return std::sin(x); }, 0.0, M_PI), 2.0, 1e-13);
  double fwd = numerics::integrate([](double x) { return x * x; }, 1.0, 2.0);
  double back = numerics::integrate([](double x) { return x * x; }, 2.0, 1.0);
  EXPECT_NEAR(fwd, 7.0 / 3.0, 1e-14);
  EXPECT_DOUBLE_EQ(fwd, -back);
}
