#include "stablab/positive.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "concave_newton.hpp"
#include "stablab/errors.hpp"

namespace stablab {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

detail::ScalarConcave positive_part(const UtilityOnRPlus& u) {
  detail::ScalarConcave phi;
  phi.in_domain = [](double x) { return x > 0.0; };
  phi.value = [&u](double x) { return x > 0.0 ? u.value(x) : kNegInf; };
  phi.d1 = [&u](double x) { return u.marginal(x); };
  phi.d2 = [&u](double x) { return u.curvature(x); };
  return phi;
}

detail::ScalarConcave pure_power(double p) {
  detail::ScalarConcave phi;
  phi.in_domain = [](double x) { return x > 0.0; };
  phi.value = [p](double x) { return x > 0.0 ? std::pow(x, p) / p : kNegInf; };
  phi.d1 = [p](double x) { return std::pow(x, p - 1.0); };
  phi.d2 = [p](double x) { return (p - 1.0) * std::pow(x, p - 2.0); };
  return phi;
}

Strategy shares_to_fractions(const ScenarioTree& tree, const Strategy& h, const AdaptedProcess& x) {
  Strategy pi = Strategy::zeros(tree, StrategyMode::fractions);
  for (int n : tree.internal_nodes()) {
    auto src = h.at(n);
    auto dst = pi.at(n);
    const auto& s = tree.node(n).price;
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] * s[i] / x[n];
  }
  return pi;
}

void check_weights(const ScenarioTree& tree, const std::vector<double>& weight) {
  if (weight.size() != tree.leaf_count()) {
    throw ValidationError("utility field: expected one weight per leaf");
  }
}

/// E_m[x_child | node] - x_node over nodes charged by m; `take_max` selects
/// the largest drift, otherwise the smallest.
double extreme_drift(const ScenarioTree& tree, const std::vector<double>& mass,
                     const std::vector<double>& x, bool take_max) {
  double out = take_max ? kNegInf : std::numeric_limits<double>::infinity();
  for (int n : tree.internal_nodes()) {
    if (mass[static_cast<std::size_t>(n)] <= 0.0) continue;
    std::vector<double> cp = conditional_child_probs(tree, mass, n);
    const auto& ch = tree.node(n).children;
    double drift = -x[static_cast<std::size_t>(n)];
    for (std::size_t c = 0; c < ch.size(); ++c) drift += cp[c] * x[static_cast<std::size_t>(ch[c])];
    out = take_max ? std::max(out, drift) : std::min(out, drift);
  }
  return out;
}

}  // namespace

PositiveSolution solve_power_field(const ScenarioTree& tree, const UtilityField& field, double x0,
                                   const PositiveOptions& opts) {
  if (!(x0 > 0.0)) throw ValidationError("solve_power_field: x0 must be positive");
  check_weights(tree, field.weight);
  if (!admits_equivalent_martingale_measure(tree)) {
    throw NoMartingaleMeasure("solve_power_field: the tree admits arbitrage");
  }
  require_spanning_increments(tree);

  const UtilityOnRPlus& u = field.utility;
  const detail::LeafDesign design = detail::price_design(tree);
  const auto& prob = tree.physical_weights();
  std::vector<double> w(prob.size());
  for (std::size_t k = 0; k < w.size(); ++k) w[k] = prob[k] * field.weight[k];
  std::vector<double> offsets(prob.size(), x0);

  detail::NewtonResult res =
      detail::maximize_separable(design, w, offsets, positive_part(u),
                                 Eigen::VectorXd::Zero(design.vars), opts.gradient_tol, opts.max_iter);
  if (!res.converged) {
    throw NonConvergence("solve_power_field: gradient not below tolerance", res.scaled_gradient_norm);
  }

  PositiveSolution sol;
  sol.p = u.p();
  sol.x0 = x0;
  sol.weight = field.weight;
  sol.shares = detail::to_strategy(tree, res.theta, StrategyMode::shares);
  sol.wealth = wealth_additive(tree, sol.shares, x0);
  for (double x : sol.wealth.values) {
    if (!(x > 0.0)) throw AdmissibilityBoundaryHit("solve_power_field: optimal wealth is not positive");
  }
  sol.fractions = shares_to_fractions(tree, sol.shares, sol.wealth);

  std::vector<double> xt = sol.wealth.terminal(tree);
  double budget = 0.0;
  for (std::size_t k = 0; k < xt.size(); ++k) {
    sol.value += w[k] * u.value(xt[k]);
    budget += w[k] * u.marginal(xt[k]) * xt[k];
  }
  sol.multiplier = budget / x0;
  sol.deflator.resize(xt.size());
  for (std::size_t k = 0; k < xt.size(); ++k) {
    sol.deflator[k] = field.weight[k] * u.marginal(xt[k]) / sol.multiplier;
  }
  sol.gradient_norm = res.gradient_norm;
  sol.iterations = res.iterations;
  return sol;
}

OpportunityProcess opportunity_process(const ScenarioTree& tree, double p,
                                       const std::vector<double>& weight, const PositiveOptions& opts) {
  if (!(p < 0.0)) throw ValidationError("opportunity_process: p must be negative");
  check_weights(tree, weight);
  for (double d : weight) {
    if (!(d > 0.0)) throw ValidationError("opportunity_process: weights must be positive");
  }
  if (!admits_equivalent_martingale_measure(tree)) {
    throw NoMartingaleMeasure("opportunity_process: the tree admits arbitrage");
  }
  require_spanning_increments(tree);

  const int d = tree.assets();
  OpportunityProcess out;
  out.values.values.assign(tree.size(), 0.0);
  out.fractions = Strategy::zeros(tree, StrategyMode::fractions);
  for (int leaf : tree.leaves()) {
    out.values.values[static_cast<std::size_t>(leaf)] =
        weight[static_cast<std::size_t>(tree.node(leaf).leaf_index)];
  }
  const detail::ScalarConcave phi = pure_power(p);

  // Internal nodes are stored parent-first, so walk them backwards.
  auto internal = tree.internal_nodes();
  for (auto it = internal.rbegin(); it != internal.rend(); ++it) {
    int n = *it;
    const auto& ch = tree.node(n).children;
    detail::LeafDesign design;
    design.vars = d;
    std::vector<double> w;
    for (int c : ch) {
      std::vector<std::pair<int, double>> row;
      for (int i = 0; i < d; ++i) row.emplace_back(i, tree.return_increment(c, i));
      design.rows.push_back(std::move(row));
      w.push_back(tree.node(c).prob * out.values[c]);
    }
    std::vector<double> ones(ch.size(), 1.0);
    detail::NewtonResult res = detail::maximize_separable(
        design, w, ones, phi, Eigen::VectorXd::Zero(d), opts.gradient_tol, opts.max_iter);
    if (!res.converged) {
      throw NonConvergence("opportunity_process: one-step problem did not converge",
                           res.scaled_gradient_norm);
    }
    out.values.values[static_cast<std::size_t>(n)] = p * res.objective;
    auto dst = out.fractions.at(n);
    for (int i = 0; i < d; ++i) dst[static_cast<std::size_t>(i)] = res.theta(i);
  }
  return out;
}

ExponentialHedge exponential_hedge(const ScenarioTree& tree, const std::vector<double>& claim,
                                   double x0, const SolverOptions& opts) {
  if (claim.size() != tree.leaf_count()) {
    throw ValidationError("exponential_hedge: expected one claim value per leaf");
  }
  std::vector<double> xi(claim.size());
  for (std::size_t k = 0; k < xi.size(); ++k) xi[k] = x0 - claim[k];

  ExponentialHedge hedge;
  hedge.primal = solve_primal(tree, make_exponential(1.0), xi, opts);
  hedge.value = hedge.primal.value;
  hedge.amounts = Strategy::zeros(tree, StrategyMode::fractions);
  for (int n : tree.internal_nodes()) {
    auto h = hedge.primal.strategy.at(n);
    auto dst = hedge.amounts.at(n);
    const auto& s = tree.node(n).price;
    for (std::size_t i = 0; i < h.size(); ++i) dst[i] = h[i] * s[i];
  }
  return hedge;
}

AuxMeasure auxiliary_measure(const ScenarioTree& tree, const PositiveSolution& pure,
                             std::uint64_t seed, std::size_t trials, double audit_tol) {
  if (pure.wealth.values.size() != tree.size()) {
    throw ValidationError("auxiliary_measure: solution belongs to a different tree");
  }
  const auto& prob = tree.physical_weights();
  std::vector<double> xt = pure.wealth.terminal(tree);

  AuxMeasure aux;
  aux.measure.weights.resize(xt.size());
  double total = 0.0;
  for (std::size_t k = 0; k < xt.size(); ++k) {
    aux.measure.weights[k] = prob[k] * pure.weight[k] * std::pow(xt[k], pure.p);
    total += aux.measure.weights[k];
  }
  for (double& w : aux.measure.weights) w /= total;

  // Random admissible wealths: a random direction at every node, scaled to a
  // random fraction of the largest step that keeps wealth positive.
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit(0.0, 0.9);
  const int d = tree.assets();
  aux.numeraire_max = kNegInf;
  for (std::size_t trial = 0; trial < trials; ++trial) {
    Strategy pi = Strategy::zeros(tree, StrategyMode::fractions);
    for (int n : tree.internal_nodes()) {
      std::vector<double> v(static_cast<std::size_t>(d));
      for (double& x : v) x = normal(rng);
      double limit = std::numeric_limits<double>::infinity();
      for (int c : tree.node(n).children) {
        double dr = 0.0;
        for (int i = 0; i < d; ++i) dr += v[static_cast<std::size_t>(i)] * tree.return_increment(c, i);
        if (dr < 0.0) limit = std::min(limit, -1.0 / dr);
      }
      if (!std::isfinite(limit)) limit = 1.0;
      double t = unit(rng) * limit;
      auto dst = pi.at(n);
      for (int i = 0; i < d; ++i) dst[static_cast<std::size_t>(i)] = t * v[static_cast<std::size_t>(i)];
    }
    AdaptedProcess x = wealth_multiplicative(tree, pi, pure.x0);
    std::vector<double> xT = x.terminal(tree);
    double e = 0.0;
    for (std::size_t k = 0; k < xT.size(); ++k) e += aux.measure.weights[k] * xT[k] / xt[k];
    aux.numeraire_max = std::max(aux.numeraire_max, e);
  }
  aux.audited = trials;
  if (trials == 0) aux.numeraire_max = 1.0;
  if (aux.numeraire_max > 1.0 + audit_tol) {
    throw AuditFailure("auxiliary_measure: numeraire audit failed, E[X/X_pure] = " +
                       std::to_string(aux.numeraire_max));
  }
  return aux;
}

RatioDiagnostics ratio_diagnostics(const ScenarioTree& tree, const UtilityOnRPlus& general_utility,
                                   const PositiveSolution& general, const PositiveSolution& pure,
                                   const AuxMeasure& aux) {
  if (general.wealth.values.size() != tree.size() || pure.wealth.values.size() != tree.size() ||
      aux.measure.weights.size() != tree.leaf_count()) {
    throw ValidationError("ratio_diagnostics: inputs belong to different trees");
  }
  if (general.p != pure.p || general.x0 != pure.x0) {
    throw ValidationError("ratio_diagnostics: solutions use different p or x0");
  }
  const double p = pure.p;
  RatioDiagnostics out;
  out.ratio.values.resize(tree.size());
  std::vector<double> rp(tree.size());
  for (std::size_t n = 0; n < tree.size(); ++n) {
    out.ratio.values[n] = general.wealth.values[n] / pure.wealth.values[n];
    rp[n] = std::pow(out.ratio.values[n], p);
  }

  const auto& q = aux.measure.weights;
  for (int leaf : tree.leaves()) {
    auto k = static_cast<std::size_t>(tree.node(leaf).leaf_index);
    double r = out.ratio[leaf];
    double x = general.wealth[leaf];
    double term = std::abs(general_utility.ratio(x) * std::pow(r, p - 1.0) - 1.0) * std::abs(1.0 - r);
    out.lemma_quantity_unscaled += q[k] * term;
    out.power_gap += q[k] * std::abs(rp[static_cast<std::size_t>(leaf)] - 1.0);
    double bracket = 0.0;
    for (int n = leaf; tree.node(n).parent >= 0; n = tree.node(n).parent) {
      double step = rp[static_cast<std::size_t>(n)] / rp[static_cast<std::size_t>(tree.node(n).parent)] - 1.0;
      bracket += step * step;
    }
    out.log_bracket += q[k] * bracket;
  }
  out.lemma_quantity = std::abs(p) * out.lemma_quantity_unscaled;

  const double up = general_utility.upper();
  const double lo = general_utility.lower();
  const double e = 1.0 / (1.0 - p);
  out.lemma_bound = 2.0 * std::max((up - 1.0) * (std::pow(up, e) - 1.0),
                                   (1.0 - lo) * (1.0 - std::pow(lo, e)));

  std::vector<double> mass = node_mass(tree, aux.measure);
  out.supermartingale_defect = extreme_drift(tree, mass, out.ratio.values, true);
  out.submartingale_defect = extreme_drift(tree, mass, rp, false);
  return out;
}

namespace {

Strategy scaled_difference(const ScenarioTree& tree, const Strategy& pi, const ExponentialHedge& hedge,
                           double p) {
  if (pi.mode != StrategyMode::fractions || hedge.amounts.mode != StrategyMode::fractions) {
    throw ModeMismatch("scaled strategy distance: expected fractions and monetary amounts");
  }
  if (pi.values.size() != hedge.amounts.values.size() || pi.values.size() != tree.size() * static_cast<std::size_t>(tree.assets())) {
    throw ValidationError("scaled strategy distance: strategies belong to different trees");
  }
  Strategy diff = Strategy::zeros(tree, StrategyMode::fractions);
  for (std::size_t i = 0; i < diff.values.size(); ++i) {
    diff.values[i] = (1.0 - p) * pi.values[i] - hedge.amounts.values[i];
  }
  return diff;
}

}  // namespace

double scaled_strategy_distance(const ScenarioTree& tree, const Strategy& pi, const ExponentialHedge& hedge,
                                double p, const Measure& m) {
  Strategy diff = scaled_difference(tree, pi, hedge, p);
  return bracket_distance(tree, m, diff, Strategy::zeros(tree, StrategyMode::fractions));
}

double scaled_strategy_gap(const ScenarioTree& tree, const Strategy& pi, const ExponentialHedge& hedge,
                           double p) {
  Strategy diff = scaled_difference(tree, pi, hedge, p);
  double gap = 0.0;
  for (int n : tree.internal_nodes()) {
    for (double v : diff.at(n)) gap = std::max(gap, std::abs(v));
  }
  return gap;
}

}  // namespace stablab
