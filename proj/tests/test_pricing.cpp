#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "common.hpp"
#include "stablab/errors.hpp"
#include "stablab/pricing.hpp"

using namespace stablab;
using stablab::fixtures::binomial;

namespace {

DualMeasure dual_of(const ScenarioTree& t, const UtilityOnR& u) {
  std::vector<double> xi(t.leaf_count(), 0.0);
  return extract_dual(t, u, solve_primal(t, u, xi));
}

std::vector<double> terminal_price(const ScenarioTree& t) {
  std::vector<double> s;
  for (int leaf : t.leaves()) s.push_back(t.node(leaf).price[0]);
  return s;
}

}  // namespace

TEST(Davis, Examples) {
  ScenarioTree t = binomial(1);
  DualMeasure q = dual_of(t, make_exponential(1.0));
  EXPECT_NEAR(davis_price(q, {1.0, 0.0}).price, 1.0 / 3, 1e-12);
  EXPECT_DOUBLE_EQ(davis_price(q, {2.5, 2.5}).price, 2.5);
  EXPECT_NEAR(davis_price(q, terminal_price(t)).price, 1.0, 1e-12);
  EXPECT_THROW(davis_price(q, {1.0, -0.1}), ValidationError);
}

TEST(Davis, MonotoneInClaim) {
  std::mt19937_64 rng(2);
  ScenarioTree t = fixtures::random_tree(rng, 2);
  DualMeasure q = dual_of(t, make_exponential(1.0));
  std::vector<double> a = fixtures::call_payoff(t, 1.0);
  std::vector<double> b = a;
  for (double& v : b) v += 0.1;
  b[0] += 1.0;
  EXPECT_LT(davis_price(q, a).price, davis_price(q, b).price);
}

TEST(Indifference, CompleteMarket) {
  ScenarioTree t = binomial(1);
  PriceResult r = indifference_price(t, make_exponential(1.0), 0.0, {1.0, 0.0});
  EXPECT_NEAR(r.price, 1.0 / 3, 1e-9);
  EXPECT_EQ(r.method, PriceMethod::indifference);
  EXPECT_DOUBLE_EQ(r.bracket_lo, 0.0);
  EXPECT_DOUBLE_EQ(r.bracket_hi, 1.0);
}

TEST(Indifference, ConstantClaim) {
  ScenarioTree t = binomial(2);
  PriceResult r = indifference_price(t, make_exponential(1.0), 0.0, std::vector<double>(4, 1.7));
  EXPECT_DOUBLE_EQ(r.price, 1.7);
}

TEST(Indifference, ExponentialIgnoresWealth) {
  ScenarioTree t = fixtures::trinomial_one_step();
  std::vector<double> put = {0.0, 0.0, 0.5};
  UtilityOnR u = make_exponential(1.0);
  double a = indifference_price(t, u, 0.0, put).price;
  double b = indifference_price(t, u, 2.0, put).price;
  EXPECT_NEAR(a, b, 1e-8);
}

TEST(Indifference, WithinNoArbitrageInterval) {
  std::mt19937_64 rng(6);
  ScenarioTree t = fixtures::random_tree(rng, 2);
  UtilityOnR u = make_perturbed_exponential(0.1, 1.0, RatioSpec{RatioKind::sine, 0.2, 1.0});
  std::vector<double> b = fixtures::call_payoff(t, 1.0);
  PriceResult r = indifference_price(t, u, 0.0, b);
  double lo = 1e300, hi = -1e300;
  for (const Measure& m : martingale_vertices(t, 256, 1)) {
    double e = 0.0;
    for (std::size_t k = 0; k < b.size(); ++k) e += m.weights[k] * b[k];
    lo = std::min(lo, e);
    hi = std::max(hi, e);
  }
  EXPECT_GE(r.price, lo - 1e-8);
  EXPECT_LE(r.price, hi + 1e-8);
  EXPECT_LE(r.residual, 1e-10);
  double d = davis_price(dual_of(t, u), b).price;
  EXPECT_GE(d, lo - 1e-12);
  EXPECT_LE(d, hi + 1e-12);
}
