#include "stablab/entropic.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "concave_newton.hpp"
#include "stablab/errors.hpp"
#include "stablab/numerics.hpp"

namespace stablab {

namespace {

void check_leaf_vector(const ScenarioTree& tree, const std::vector<double>& v, const char* what) {
  if (v.size() != tree.leaf_count()) {
    throw ValidationError(std::string(what) + ": expected one value per leaf");
  }
  for (double x : v) {
    if (!std::isfinite(x)) throw ValidationError(std::string(what) + ": non-finite value");
  }
}

/// Root in s = ln y of a decreasing function h(s), found by expanding a
/// bracket around s = 0.
double log_root(const std::function<std::pair<double, double>(double)>& h) {
  double lo = -1.0;
  double hi = 1.0;
  for (int i = 0; i < 200 && h(lo).first < 0.0; ++i) lo -= (hi - lo);
  for (int i = 0; i < 200 && h(hi).first > 0.0; ++i) hi += (hi - lo);
  return numerics::safeguarded_root(h, lo, hi);
}

/// E_m[I(y z)] with z = dm/dP, skipping leaves that m does not charge.
std::pair<double, double> expected_inverse(const UtilityOnR& u, const std::vector<double>& m,
                                           const std::vector<double>& z, double s) {
  double y = std::exp(s);
  double val = 0.0;
  double slope = 0.0;
  for (std::size_t k = 0; k < m.size(); ++k) {
    if (m[k] <= 0.0) continue;
    double x = u.inverse_marginal(y * z[k]);
    val += m[k] * x;
    slope += m[k] * y * z[k] / u.curvature(x);
  }
  return {val, slope};
}

std::vector<double> density(const ScenarioTree& tree, const Measure& m) {
  const auto& p = tree.physical_weights();
  std::vector<double> z(p.size());
  for (std::size_t k = 0; k < p.size(); ++k) z[k] = m.weights[k] / p[k];
  return z;
}

}  // namespace

PrimalSolution solve_primal(const ScenarioTree& tree, const UtilityOnR& u,
                            const std::vector<double>& endowment, const SolverOptions& opts) {
  check_leaf_vector(tree, endowment, "endowment");
  if (!admits_equivalent_martingale_measure(tree)) {
    throw NoMartingaleMeasure("solve_primal: the tree admits arbitrage");
  }
  require_spanning_increments(tree);

  const detail::LeafDesign design = detail::price_design(tree);
  const double scale = opts.normalize_risk_aversion ? u.alpha() : 1.0;

  // With scale = alpha this is the problem for alpha*U(x/alpha).
  detail::ScalarConcave phi;
  phi.value = [&u, scale](double x) { return scale * u.value(x / scale); };
  phi.d1 = [&u, scale](double x) { return u.marginal(x / scale); };
  phi.d2 = [&u, scale](double x) { return u.curvature(x / scale) / scale; };

  std::vector<double> offsets(endowment);
  for (double& x : offsets) x *= scale;

  Eigen::VectorXd theta0 = Eigen::VectorXd::Zero(design.vars);
  if (opts.initial) {
    if (opts.initial->mode != StrategyMode::shares) {
      throw ModeMismatch("solve_primal: warm start must be a share strategy");
    }
    theta0 = detail::from_strategy(tree, *opts.initial) * scale;
  }

  detail::NewtonResult res = detail::maximize_separable(
      design, tree.physical_weights(), offsets, phi, theta0, opts.gradient_tol, opts.max_iter);
  if (!res.converged) {
    throw NonConvergence("solve_primal: gradient not below tolerance", res.scaled_gradient_norm);
  }

  PrimalSolution sol;
  sol.strategy = detail::to_strategy(tree, res.theta / scale, StrategyMode::shares);
  sol.wealth = wealth_additive(tree, sol.strategy, 0.0);
  sol.endowment = endowment;
  sol.total = sol.wealth.terminal(tree);
  const auto& p = tree.physical_weights();
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(design.vars);
  for (std::size_t k = 0; k < sol.total.size(); ++k) {
    sol.total[k] += endowment[k];
    sol.value += p[k] * u.value(sol.total[k]);
    double w = p[k] * u.marginal(sol.total[k]);
    for (const auto& [var, coef] : design.rows[k]) grad(var) += w * coef;
  }
  sol.gradient_norm = grad.size() ? grad.cwiseAbs().maxCoeff() : 0.0;
  sol.iterations = res.iterations;
  return sol;
}

DualMeasure extract_dual(const ScenarioTree& tree, const UtilityOnR& u, const PrimalSolution& sol,
                         double tol) {
  check_leaf_vector(tree, sol.total, "extract_dual");
  const auto& p = tree.physical_weights();
  DualMeasure dual;
  dual.measure.weights.resize(p.size());
  double y = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    dual.measure.weights[k] = p[k] * u.marginal(sol.total[k]);
    y += dual.measure.weights[k];
  }
  for (double& w : dual.measure.weights) w /= y;
  dual.multiplier = y;
  double residual = martingale_residual(tree, dual.measure);
  if (residual > tol) {
    throw NonConvergence("extract_dual: first-order measure is not a martingale measure", residual);
  }
  return dual;
}

DualMeasure minimal_entropy_measure(const ScenarioTree& tree, const UtilityOnR& u, double tol,
                                    int max_iter) {
  if (!admits_equivalent_martingale_measure(tree)) {
    throw NoMartingaleMeasure("minimal_entropy_measure: the tree admits arbitrage");
  }
  const auto& p = tree.physical_weights();
  const auto n = static_cast<Eigen::Index>(p.size());

  // Constraints A q = b: one martingale row per (internal node, asset) and
  // the total mass row.
  const detail::LeafDesign design = detail::price_design(tree);
  const Eigen::Index m = design.vars + 1;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    for (const auto& [var, coef] : design.rows[static_cast<std::size_t>(k)]) a(var, k) += coef;
    a(m - 1, k) = 1.0;
  }
  Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
  b(m - 1) = 1.0;

  Eigen::VectorXd q(n);
  for (Eigen::Index k = 0; k < n; ++k) q(k) = p[static_cast<std::size_t>(k)];
  Eigen::VectorXd nu = Eigen::VectorXd::Zero(m);

  auto gradient = [&](const Eigen::VectorXd& qq) {
    Eigen::VectorXd g(n);
    for (Eigen::Index k = 0; k < n; ++k) g(k) = u.conjugate_slope(qq(k) / p[static_cast<std::size_t>(k)]);
    return g;
  };
  auto residual = [&](const Eigen::VectorXd& qq, const Eigen::VectorXd& w) {
    Eigen::VectorXd r(n + m);
    r.head(n) = gradient(qq) + a.transpose() * w;
    r.tail(m) = a * qq - b;
    return r;
  };

  Eigen::VectorXd r = residual(q, nu);
  double rnorm = r.cwiseAbs().maxCoeff();
  int it = 0;
  for (; it < max_iter && rnorm > tol; ++it) {
    Eigen::VectorXd hinv(n);
    for (Eigen::Index k = 0; k < n; ++k) {
      double pk = p[static_cast<std::size_t>(k)];
      hinv(k) = pk / u.conjugate_curvature(q(k) / pk);
    }
    // Schur complement of the KKT system in the multipliers.
    Eigen::MatrixXd s = a * hinv.asDiagonal() * a.transpose();
    Eigen::VectorXd g = gradient(q);
    Eigen::VectorXd rhs = (a * q - b) - a * hinv.cwiseProduct(g);
    Eigen::VectorXd w = s.colPivHouseholderQr().solve(rhs);
    Eigen::VectorXd dq = -hinv.cwiseProduct(g + a.transpose() * w);
    Eigen::VectorXd dnu = w - nu;

    double t = 1.0;
    for (Eigen::Index k = 0; k < n; ++k) {
      if (dq(k) < 0.0) t = std::min(t, -0.99 * q(k) / dq(k));
    }
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      Eigen::VectorXd q_try = q + t * dq;
      Eigen::VectorXd nu_try = nu + t * dnu;
      Eigen::VectorXd r_try = residual(q_try, nu_try);
      double n_try = r_try.cwiseAbs().maxCoeff();
      if (n_try <= (1.0 - 0.01 * t) * rnorm) {
        q = q_try;
        nu = nu_try;
        rnorm = n_try;
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;
  }
  // The residual floor is set by rounding in V'; accept anything near it.
  if (rnorm > std::max(tol, 1e-10)) {
    throw NonConvergence("minimal_entropy_measure: KKT residual not below tolerance", rnorm);
  }

  DualMeasure dual;
  dual.measure.weights.assign(q.data(), q.data() + n);
  double total = 0.0;
  for (double w : dual.measure.weights) total += w;
  for (double& w : dual.measure.weights) w /= total;

  // y solves E_Q[I(y dQ/dP)] = 0, the zero-endowment budget condition.
  std::vector<double> z = density(tree, dual.measure);
  const auto& qw = dual.measure.weights;
  double s = log_root([&](double ls) { return expected_inverse(u, qw, z, ls); });
  dual.multiplier = std::exp(s);
  return dual;
}

double generalized_entropy(const ScenarioTree& tree, const Measure& m, const UtilityOnR& u) {
  validate_measure(tree, m);
  const auto& p = tree.physical_weights();
  double total = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    double z = m.weights[k] / p[k];
    total += p[k] * (z > 0.0 ? u.conjugate(z) : u.supremum());
  }
  return total;
}

OptimalityReport verify_optimality(const ScenarioTree& tree, const UtilityOnR& u,
                                   const PrimalSolution& sol, const DualMeasure& dual,
                                   const std::vector<Measure>& probes, double probe_tol) {
  OptimalityReport rep;
  const auto& x = sol.wealth.values;

  auto max_drift = [&](const Measure& m, bool absolute) {
    std::vector<double> mass = node_mass(tree, m);
    double worst = absolute ? 0.0 : -std::numeric_limits<double>::infinity();
    for (int n : tree.internal_nodes()) {
      if (mass[static_cast<std::size_t>(n)] <= 0.0) continue;
      std::vector<double> cp = conditional_child_probs(tree, mass, n);
      double drift = 0.0;
      const auto& ch = tree.node(n).children;
      for (std::size_t c = 0; c < ch.size(); ++c) {
        drift += cp[c] * (x[static_cast<std::size_t>(ch[c])] - x[static_cast<std::size_t>(n)]);
      }
      worst = std::max(worst, absolute ? std::abs(drift) : drift);
    }
    return worst;
  };

  rep.martingale_defect = max_drift(dual.measure, true);
  rep.supermartingale_slack = probes.empty() ? 0.0 : -std::numeric_limits<double>::infinity();
  for (const Measure& m : probes) {
    validate_measure(tree, m);
    if (martingale_residual(tree, m) > probe_tol) {
      throw ValidationError("verify_optimality: probe is not a martingale measure");
    }
    rep.supermartingale_slack = std::max(rep.supermartingale_slack, max_drift(m, false));
  }
  rep.probe_count = probes.size();

  const auto& p = tree.physical_weights();
  for (std::size_t k = 0; k < p.size(); ++k) {
    double lhs = dual.multiplier * dual.measure.weights[k] / p[k];
    rep.first_order_residual =
        std::max(rep.first_order_residual, std::abs(lhs - u.marginal(sol.total[k])));
  }
  return rep;
}

std::vector<Measure> default_probes(const ScenarioTree& tree, std::uint64_t seed,
                                    std::size_t max_vertices, std::size_t interior) {
  std::vector<Measure> probes = martingale_vertices(tree, max_vertices, seed);
  std::vector<Measure> inner = random_martingale_measures(tree, interior, seed + 1);
  probes.insert(probes.end(), inner.begin(), inner.end());
  return probes;
}

double dual_objective(const ScenarioTree& tree, const UtilityOnR& u, const Measure& m,
                      const std::vector<double>& endowment, double y) {
  check_leaf_vector(tree, endowment, "dual_objective");
  if (!(y > 0.0)) throw ValidationError("dual_objective: y must be positive");
  const auto& p = tree.physical_weights();
  double total = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    double z = m.weights[k] / p[k];
    total += p[k] * (z > 0.0 ? u.conjugate(y * z) : u.supremum()) + y * m.weights[k] * endowment[k];
  }
  return total;
}

double dual_bound(const ScenarioTree& tree, const UtilityOnR& u, const Measure& m,
                  const std::vector<double>& endowment) {
  check_leaf_vector(tree, endowment, "dual_bound");
  validate_measure(tree, m);
  std::vector<double> z = density(tree, m);
  double mean_xi = 0.0;
  for (std::size_t k = 0; k < z.size(); ++k) mean_xi += m.weights[k] * endowment[k];
  // d/dy of the objective is E_m[xi] - E_m[I(y z)], increasing in y.
  double s = log_root([&](double ls) {
    auto [v, d] = expected_inverse(u, m.weights, z, ls);
    return std::pair<double, double>{v - mean_xi, d};
  });
  return dual_objective(tree, u, m, endowment, std::exp(s));
}

}  // namespace stablab
