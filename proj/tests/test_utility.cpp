#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "stablab/errors.hpp"
#include "stablab/utility.hpp"

using namespace stablab;

namespace {

UtilityOnR sine(double delta, double a = 0.2, double omega = 1.0, double alpha = 1.0) {
  return make_perturbed_exponential(delta, alpha, RatioSpec{RatioKind::sine, a, omega});
}

}  // namespace

TEST(Exponential, BasicValues) {
  UtilityOnR u = make_exponential(1.0);
  EXPECT_DOUBLE_EQ(u.conjugate(1.0), -1.0);
  EXPECT_DOUBLE_EQ(u.inverse_marginal(1.0), 0.0);
  EXPECT_DOUBLE_EQ(u.value(0.0), -1.0);
  EXPECT_DOUBLE_EQ(u.supremum(), 0.0);
  UtilityOnR two = make_exponential(2.0);
  EXPECT_DOUBLE_EQ(two.f(), 0.0);
  EXPECT_DOUBLE_EQ(two.g(), 1.0);
  EXPECT_THROW(make_exponential(0.0), ValidationError);
  EXPECT_THROW(make_exponential(-1.0), ValidationError);
}

TEST(Perturbed, ZeroDeltaIsExponential) {
  UtilityOnR e = make_exponential(1.0);
  UtilityOnR s = sine(0.0);
  for (double x : {-3.0, -0.5, 0.0, 1.0, 4.0}) {
    EXPECT_NEAR(s.value(x), e.value(x), 1e-14);
    EXPECT_NEAR(s.marginal(x), e.marginal(x), 1e-14);
  }
}

TEST(Perturbed, SineCertificate) {
  UtilityOnR s = sine(0.1);
  EXPECT_NEAR(s.lower(), 0.98, 1e-15);
  EXPECT_NEAR(s.upper(), 1.02, 1e-15);
  EXPECT_NEAR(s.f(), 0.02, 1e-15);
  RatioCertificate c = certify_ratio_bounds(s, default_grid_r());
  EXPECT_TRUE(c.monotone);
  EXPECT_GE(c.lower, 0.98 - 1e-12);
  EXPECT_LE(c.upper, 1.02 + 1e-12);
  EXPECT_LE(c.sup_deviation, 0.02 + 1e-12);
  EXPECT_GT(c.sup_deviation, 0.019);
}

TEST(Perturbed, ConstructionChecks) {
  // a * delta >= 1 makes F vanish somewhere.
  EXPECT_THROW(sine(5.0), ValidationError);
  // omega large enough that U' is not decreasing.
  EXPECT_THROW(sine(0.5, 0.5, 20.0), ValidationError);
  FamilyOptions loose;
  loose.unchecked = true;
  UtilityOnR bad = make_perturbed_exponential(0.5, 1.0, RatioSpec{RatioKind::sine, 0.5, 20.0}, loose);
  EXPECT_FALSE(certify_ratio_bounds(bad, default_grid_r()).monotone);
}

TEST(Perturbed, RoundTripAndConjugate) {
  for (const UtilityOnR& u : {sine(0.2), sine(0.05, 0.3, 2.0, 1.3),
                              make_perturbed_exponential(0.1, 1.0, RatioSpec{RatioKind::constant_shift, 0.2, 1.0})}) {
    for (double x = -5.0; x <= 5.0; x += 0.25) {
      EXPECT_NEAR(u.inverse_marginal(u.marginal(x)), x, 1e-10) << x;
      double y = u.marginal(x);
      EXPECT_NEAR(u.conjugate(y), u.value(x) - x * y, 1e-9 * (1 + std::abs(u.value(x))));
    }
    // U' is the derivative of U
    for (double x : {-2.0, 0.3, 3.0}) {
      double h = 1e-5;
      EXPECT_NEAR((u.value(x + h) - u.value(x - h)) / (2 * h), u.marginal(x), 1e-7 * (1 + u.marginal(x)));
    }
    EXPECT_NEAR(u.value(0.0), -1.0 / u.alpha(), 1e-14);
  }
}

TEST(Perturbed, FenchelYoung) {
  UtilityOnR u = sine(0.1);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> xs(-6.0, 6.0), ys(-3.0, 3.0);
  for (int i = 0; i < 500; ++i) {
    double x = xs(rng), y = std::exp(ys(rng));
    EXPECT_LE(u.value(x), u.conjugate(y) + x * y + 1e-10);
  }
}

TEST(Perturbed, ConjugateSandwich) {
  std::vector<double> ys = log_grid(-6, 6, 401);
  EXPECT_LE(conjugate_sandwich_audit(make_exponential(1.0), ys), 1e-8);
  EXPECT_LE(conjugate_sandwich_audit(sine(0.1), ys), 1e-8);
  EXPECT_LE(conjugate_sandwich_audit(sine(0.2, 0.2, 1.0, 1.2), ys), 1e-8);
}

TEST(Power, BasicValues) {
  UtilityOnRPlus u = make_power(-1.0);
  EXPECT_DOUBLE_EQ(u.value(1.0), -1.0);
  EXPECT_DOUBLE_EQ(u.value(2.0), -0.5);
  EXPECT_DOUBLE_EQ(u.marginal(2.0), 0.25);
  EXPECT_NEAR(u.inverse_marginal(0.25), 2.0, 1e-14);
  EXPECT_TRUE(u.pure());
  EXPECT_THROW(make_power(0.0), ValidationError);
  EXPECT_THROW(make_power(0.5), ValidationError);
}

TEST(Power, LogSineRoundTrip) {
  UtilityOnRPlus u = make_log_sine_power(-3.0, 0.2, 1.0);
  EXPECT_NEAR(u.lower(), 0.8, 1e-15);
  EXPECT_NEAR(u.upper(), 1.2, 1e-15);
  for (double x : {0.05, 0.3, 1.0, 2.5, 40.0}) {
    EXPECT_NEAR(u.inverse_marginal(u.marginal(x)) / x, 1.0, 1e-10);
    double h = 1e-6 * x;
    EXPECT_NEAR((u.value(x + h) - u.value(x - h)) / (2 * h) / u.marginal(x), 1.0, 1e-6);
  }
  EXPECT_THROW(make_log_sine_power(-1.0, 0.5, 10.0), ValidationError);
}

TEST(Power, FamilyMember) {
  UtilityOnRPlus base = make_log_sine_power(-1.0, 0.1, 1.0);
  auto mix = inverse_linear_mix(-1.0);
  UtilityOnRPlus same = make_power_family_member(base, -1.0, mix);
  for (double x : {0.2, 1.0, 3.0}) EXPECT_NEAR(same.marginal(x), base.marginal(x), 1e-14);
  UtilityOnRPlus far = make_power_family_member(base, -10.0, mix);
  EXPECT_NEAR(far.lower(), 0.99, 1e-14);
  EXPECT_NEAR(far.upper(), 1.01, 1e-14);
  for (double x : log_grid(-3, 3, 61)) {
    double r = far.ratio(x);
    EXPECT_GE(r, far.lower() - 1e-13);
    EXPECT_LE(r, far.upper() + 1e-13);
  }
  EXPECT_LE(power_sandwich_audit(far, default_grid_rplus()), 1e-10);
  // A pure base stays pure along the family.
  UtilityOnRPlus pure = make_power_family_member(make_power(-1.0), -5.0, mix);
  EXPECT_TRUE(pure.pure());
  EXPECT_NEAR(pure.marginal(2.0), std::pow(2.0, -6.0), 1e-15);
  EXPECT_THROW(make_power_family_member(base, -0.5, mix), ValidationError);
}

TEST(Power, CertificatesAreMonotone) {
  RatioCertificate c = certify_ratio_bounds(make_log_sine_power(-3.0, 0.2, 1.0), default_grid_rplus());
  EXPECT_TRUE(c.monotone);
  EXPECT_GE(c.lower, 0.8 - 1e-12);
  EXPECT_LE(c.upper, 1.2 + 1e-12);
}

TEST(Field, WeightBounds) {
  UtilityField f = UtilityField::make(make_power(-1.0), {0.5, 2.0});
  EXPECT_DOUBLE_EQ(f.k1, 0.5);
  EXPECT_DOUBLE_EQ(f.k2, 2.0);
  EXPECT_THROW(UtilityField::make(make_power(-1.0), {0.0, 1.0}), ValidationError);
  EXPECT_THROW(UtilityField::make(make_power(-1.0), {0.5, 2.0}, 1.0), ValidationError);
}
