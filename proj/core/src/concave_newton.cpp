#include "concave_newton.hpp"

#include <cmath>
#include <limits>

namespace stablab::detail {

LeafDesign price_design(const ScenarioTree& tree) {
  const int d = tree.assets();
  LeafDesign design;
  design.vars = static_cast<int>(tree.internal_count()) * d;
  for (int leaf : tree.leaves()) {
    std::vector<std::pair<int, double>> row;
    for (int n = leaf; tree.node(n).parent >= 0; n = tree.node(n).parent) {
      int parent = tree.node(n).parent;
      int base = tree.node(parent).internal_index * d;
      for (int i = 0; i < d; ++i) row.emplace_back(base + i, tree.price_increment(n, i));
    }
    design.rows.push_back(std::move(row));
  }
  return design;
}

Strategy to_strategy(const ScenarioTree& tree, const Eigen::VectorXd& theta, StrategyMode mode) {
  Strategy s = Strategy::zeros(tree, mode);
  const int d = tree.assets();
  for (int n : tree.internal_nodes()) {
    auto pos = s.at(n);
    for (int i = 0; i < d; ++i) pos[static_cast<std::size_t>(i)] = theta(tree.node(n).internal_index * d + i);
  }
  return s;
}

Eigen::VectorXd from_strategy(const ScenarioTree& tree, const Strategy& s) {
  const int d = tree.assets();
  Eigen::VectorXd theta(static_cast<Eigen::Index>(tree.internal_count()) * d);
  for (int n : tree.internal_nodes()) {
    auto pos = s.at(n);
    for (int i = 0; i < d; ++i) theta(tree.node(n).internal_index * d + i) = pos[static_cast<std::size_t>(i)];
  }
  return theta;
}

namespace {

struct Evaluation {
  std::vector<double> x;
  bool feasible = true;
};

Evaluation positions(const LeafDesign& design, const std::vector<double>& offsets,
                     const Eigen::VectorXd& theta, const ScalarConcave& phi) {
  Evaluation e;
  e.x.resize(design.rows.size());
  for (std::size_t k = 0; k < design.rows.size(); ++k) {
    double v = offsets[k];
    for (const auto& [var, coef] : design.rows[k]) v += coef * theta(var);
    e.x[k] = v;
    if (phi.in_domain && !phi.in_domain(v)) e.feasible = false;
  }
  return e;
}

double objective(const std::vector<double>& weights, const Evaluation& e, const ScalarConcave& phi) {
  if (!e.feasible) return -std::numeric_limits<double>::infinity();
  double j = 0.0;
  for (std::size_t k = 0; k < e.x.size(); ++k) j += weights[k] * phi.value(e.x[k]);
  return j;
}

/// Gradient, negated Hessian and the scale sum_k w_k phi'(x_k).
double derivatives(const LeafDesign& design, const std::vector<double>& weights,
                   const Evaluation& e, const ScalarConcave& phi, Eigen::VectorXd& grad,
                   Eigen::MatrixXd* neg_hess) {
  grad.setZero(design.vars);
  if (neg_hess) neg_hess->setZero(design.vars, design.vars);
  double scale = 0.0;
  for (std::size_t k = 0; k < e.x.size(); ++k) {
    double g1 = weights[k] * phi.d1(e.x[k]);
    scale += g1;
    for (const auto& [var, coef] : design.rows[k]) grad(var) += g1 * coef;
    if (neg_hess) {
      double g2 = -weights[k] * phi.d2(e.x[k]);
      for (const auto& [vi, ci] : design.rows[k]) {
        for (const auto& [vj, cj] : design.rows[k]) (*neg_hess)(vi, vj) += g2 * ci * cj;
      }
    }
  }
  return scale;
}

}  // namespace

NewtonResult maximize_separable(const LeafDesign& design, const std::vector<double>& weights,
                                const std::vector<double>& offsets, const ScalarConcave& phi,
                                Eigen::VectorXd theta, double tol, int max_iter) {
  NewtonResult out;
  Eigen::VectorXd grad;
  Eigen::VectorXd grad_trial;
  Eigen::MatrixXd neg_hess;

  Evaluation e = positions(design, offsets, theta, phi);
  double j0 = objective(weights, e, phi);
  for (int it = 0; it <= max_iter; ++it) {
    double scale = derivatives(design, weights, e, phi, grad, &neg_hess);
    out.iterations = it;
    out.gradient_norm = grad.size() ? grad.cwiseAbs().maxCoeff() : 0.0;
    out.scaled_gradient_norm = scale > 0.0 ? out.gradient_norm / scale : out.gradient_norm;
    if (out.scaled_gradient_norm <= tol) {
      out.converged = true;
      break;
    }
    if (it == max_iter) break;

    Eigen::LDLT<Eigen::MatrixXd> ldlt(neg_hess);
    Eigen::VectorXd step = ldlt.solve(grad);
    double slope = grad.dot(step);
    if (ldlt.info() != Eigen::Success || !(slope > 0.0) || !step.allFinite()) {
      step = grad / std::max(neg_hess.diagonal().maxCoeff(), 1e-300);
      slope = grad.dot(step);
    }

    // Once the predicted increase is below the rounding level of the
    // objective, steps are judged by the gradient instead.
    const double noise = 1e-13 * (1.0 + std::abs(j0));
    const bool roundoff = 0.5 * slope <= noise;
    bool accepted = false;
    double t = 1.0;
    for (int ls = 0; ls < 60; ++ls) {
      Eigen::VectorXd trial = theta + t * step;
      Evaluation et = positions(design, offsets, trial, phi);
      if (et.feasible) {
        bool ok = false;
        if (roundoff || 1e-4 * t * slope < noise) {
          derivatives(design, weights, et, phi, grad_trial, nullptr);
          ok = grad_trial.cwiseAbs().maxCoeff() < out.gradient_norm;
        } else {
          ok = objective(weights, et, phi) >= j0 + 1e-4 * t * slope;
        }
        if (ok) {
          theta = std::move(trial);
          e = std::move(et);
          j0 = objective(weights, e, phi);
          accepted = true;
          break;
        }
      }
      t *= 0.5;
    }
    if (!accepted) break;
  }
  out.theta = std::move(theta);
  out.objective = j0;
  return out;
}

}  // namespace stablab::detail
