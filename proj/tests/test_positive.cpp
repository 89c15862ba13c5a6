#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "common.hpp"
#include "stablab/errors.hpp"
#include "stablab/positive.hpp"

using namespace stablab;
using stablab::fixtures::binomial;

namespace {

UtilityField pure_field(const ScenarioTree& t, double p) {
  return UtilityField::make(make_power(p), std::vector<double>(t.leaf_count(), 1.0));
}

// One-step binomial with dR in {1, -0.5}: the first-order condition
// 0.5 (1+pi)^{p-1} = 0.25 (1-pi/2)^{p-1} gives pi in closed form.
double binomial_pi(double p) {
  double c = std::pow(0.5, 1.0 / (1.0 - p));
  return (1.0 - c) / (c + 0.5);
}

}  // namespace

TEST(PowerSolve, BinomialOracle) {
  ScenarioTree t = binomial(1);
  PositiveSolution s = solve_power_field(t, pure_field(t, -1.0), 1.0);
  EXPECT_NEAR(binomial_pi(-1.0), 0.242640687119, 1e-11);
  EXPECT_NEAR(s.fractions.at(0)[0], binomial_pi(-1.0), 1e-11);
  // y x0 = E[D U'(X) X]
  std::vector<double> xt = s.wealth.terminal(t);
  double budget = 0.0;
  for (std::size_t k = 0; k < xt.size(); ++k) budget += 0.5 * std::pow(xt[k], -1.0);
  EXPECT_NEAR(s.multiplier, budget, 1e-13);
  double ey = 0.0;
  for (std::size_t k = 0; k < xt.size(); ++k) ey += 0.5 * s.deflator[k] * xt[k];
  EXPECT_NEAR(ey, 1.0, 1e-12);
}

TEST(PowerSolve, ScaledFractionsApproachEntropicHedge) {
  ScenarioTree t = binomial(1);
  double h0 = std::log(2.0) / 1.5;
  double prev = 1.0;
  for (double p : {-7.0, -31.0, -127.0}) {
    PositiveSolution s = solve_power_field(t, pure_field(t, p), 1.0);
    double gap = std::abs((1 - p) * s.fractions.at(0)[0] - h0);
    EXPECT_LT(gap, prev);
    prev = gap;
  }
  EXPECT_LT(prev, 5e-3);
}

TEST(PowerSolve, ConstantWeightDoesNotMoveStrategy) {
  ScenarioTree t = binomial(2);
  PositiveSolution a = solve_power_field(t, pure_field(t, -3.0), 1.0);
  PositiveSolution b =
      solve_power_field(t, UtilityField::make(make_power(-3.0), std::vector<double>(t.leaf_count(), 2.5)), 1.0);
  for (int n : t.internal_nodes()) EXPECT_NEAR(a.fractions.at(n)[0], b.fractions.at(n)[0], 1e-11);
}

TEST(PowerSolve, GeneralUtilityBudgetIdentity) {
  std::mt19937_64 rng(3);
  ScenarioTree t = fixtures::random_tree(rng, 2);
  UtilityOnRPlus u = make_power_family_member(make_log_sine_power(-3.0, 0.2, 1.0), -7.0, inverse_linear_mix(-3.0));
  std::vector<double> d(t.leaf_count());
  std::uniform_real_distribution<double> w(0.5, 2.0);
  for (double& v : d) v = w(rng);
  PositiveSolution s = solve_power_field(t, UtilityField::make(u, d), 2.0);
  std::vector<double> xt = s.wealth.terminal(t);
  const auto& pw = t.physical_weights();
  double lhs = 0.0;
  for (std::size_t k = 0; k < xt.size(); ++k) lhs += pw[k] * d[k] * u.marginal(xt[k]) * xt[k];
  EXPECT_NEAR(s.multiplier * 2.0, lhs, 1e-12 * std::abs(lhs));
  // The deflated wealth is a P-martingale: E[Y X_T] = x0 and E[Y dS-gains] = 0.
  double ey = 0.0;
  for (std::size_t k = 0; k < xt.size(); ++k) ey += pw[k] * s.deflator[k] * xt[k];
  EXPECT_NEAR(ey, 2.0, 1e-10);
}

TEST(Opportunity, BinomialOracle) {
  ScenarioTree t = binomial(1);
  OpportunityProcess l = opportunity_process(t, -1.0, std::vector<double>(2, 1.0));
  EXPECT_NEAR(l.values[0], 0.971404520791, 1e-11);
  PositiveSolution s = solve_power_field(t, pure_field(t, -1.0), 1.0);
  // u = L_0 x0^p / p and y = L_0 x0^{p-1}
  EXPECT_NEAR(s.value, -l.values[0], 1e-12);
  EXPECT_NEAR(s.multiplier, l.values[0], 1e-12);
}

TEST(Opportunity, TwoStepMatchesDirectSolve) {
  std::mt19937_64 rng(8);
  ScenarioTree t = fixtures::random_tree(rng, 2);
  std::vector<double> d(t.leaf_count());
  std::uniform_real_distribution<double> w(0.5, 2.0);
  for (double& v : d) v = w(rng);
  double p = -4.0;
  OpportunityProcess l = opportunity_process(t, p, d);
  PositiveSolution s = solve_power_field(t, UtilityField::make(make_power(p), d), 1.5);
  EXPECT_NEAR(s.value, l.values[0] * std::pow(1.5, p) / p, 1e-11 * std::abs(s.value));
  for (int n : t.internal_nodes()) EXPECT_NEAR(l.fractions.at(n)[0], s.fractions.at(n)[0], 1e-9);
}

TEST(Hedge, BinomialOracle) {
  ScenarioTree t = binomial(1);
  ExponentialHedge h = exponential_hedge(t, std::vector<double>(2, 0.0), 1.0);
  EXPECT_NEAR(h.amounts.at(0)[0], std::log(2.0) / 1.5, 1e-12);
  // A replicable claim is hedged exactly: X_T - B is constant.
  ScenarioTree t2 = binomial(2);
  std::vector<double> call = fixtures::call_payoff(t2, 1.0);
  ExponentialHedge c = exponential_hedge(t2, call, 1.0);
  ExponentialHedge c_shift = exponential_hedge(t2, call, 3.0);
  for (int n : t2.internal_nodes()) EXPECT_NEAR(c.amounts.at(n)[0], c_shift.amounts.at(n)[0], 1e-10);
}

TEST(Auxiliary, BinomialOracleAndNumeraire) {
  ScenarioTree t = binomial(1);
  PositiveSolution s = solve_power_field(t, pure_field(t, -1.0), 1.0);
  AuxMeasure aux = auxiliary_measure(t, s, 1, 10);
  EXPECT_NEAR(aux.measure.weights[0], 0.414213562373, 1e-11);
  EXPECT_LE(aux.numeraire_max, 1.0 + 1e-9);
  EXPECT_EQ(aux.audited, 10u);
}

TEST(Diagnostics, PureAgainstItselfIsTrivial) {
  ScenarioTree t = binomial(2);
  PositiveSolution s = solve_power_field(t, pure_field(t, -3.0), 1.0);
  AuxMeasure aux = auxiliary_measure(t, s);
  RatioDiagnostics d = ratio_diagnostics(t, make_power(-3.0), s, s, aux);
  EXPECT_NEAR(d.lemma_quantity, 0.0, 1e-13);
  EXPECT_NEAR(d.power_gap, 0.0, 1e-13);
  EXPECT_NEAR(d.log_bracket, 0.0, 1e-20);
  for (double r : d.ratio.values) EXPECT_NEAR(r, 1.0, 1e-12);
}

TEST(Diagnostics, FamilyMemberStaysWithinBounds) {
  ScenarioTree t = binomial(2);
  UtilityOnRPlus base = make_log_sine_power(-1.0, 0.1, 1.0);
  double prev_gap = 1.0;
  for (double p : {-10.0, -40.0}) {
    UtilityOnRPlus u = make_power_family_member(base, p, inverse_linear_mix(-1.0));
    PositiveSolution g = solve_power_field(t, UtilityField::make(u, std::vector<double>(4, 1.0)), 1.0);
    PositiveSolution s = solve_power_field(t, pure_field(t, p), 1.0);
    AuxMeasure aux = auxiliary_measure(t, s);
    RatioDiagnostics d = ratio_diagnostics(t, u, g, s, aux);
    EXPECT_LE(d.lemma_quantity_unscaled, d.lemma_bound + 1e-12);
    EXPECT_LE(d.supermartingale_defect, 1e-12);
    EXPECT_GE(d.submartingale_defect, -1e-12);
    EXPECT_LT(d.power_gap, prev_gap);
    prev_gap = d.power_gap;
    // 1/u_p <= y~/y <= 1/l_p
    double ratio = s.multiplier / g.multiplier;
    EXPECT_GE(ratio, 1.0 / u.upper() - 1e-12);
    EXPECT_LE(ratio, 1.0 / u.lower() + 1e-12);
  }
}

TEST(StrategyDistance, Scaling) {
  ScenarioTree t = binomial(2);
  ExponentialHedge h = exponential_hedge(t, std::vector<double>(4, 0.0), 1.0);
  Measure m = physical_measure(t);
  double p = -3.0;
  Strategy exact = h.amounts;
  for (double& v : exact.values) v /= (1 - p);
  EXPECT_NEAR(scaled_strategy_distance(t, exact, h, p, m), 0.0, 1e-24);
  EXPECT_NEAR(scaled_strategy_gap(t, exact, h, p), 0.0, 1e-15);
  Strategy off = exact;
  for (double& v : off.values) v += 0.01;
  Strategy off2 = exact;
  for (double& v : off2.values) v += 0.02;
  EXPECT_NEAR(scaled_strategy_distance(t, off2, h, p, m), 4 * scaled_strategy_distance(t, off, h, p, m), 1e-15);
  EXPECT_NEAR(scaled_strategy_gap(t, off, h, p), 0.04, 1e-13);
}
