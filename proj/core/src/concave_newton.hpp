#pragma once

#include <Eigen/Dense>

#include <functional>
#include <utility>
#include <vector>

#include "stablab/market.hpp"

namespace stablab::detail {

/// Terminal position of leaf k is offset[k] + sum_j coef * theta[var].
struct LeafDesign {
  int vars = 0;
  std::vector<std::vector<std::pair<int, double>>> rows;
};

/// Share positions at internal nodes against price increments.
LeafDesign price_design(const ScenarioTree& tree);

Strategy to_strategy(const ScenarioTree& tree, const Eigen::VectorXd& theta, StrategyMode mode);
Eigen::VectorXd from_strategy(const ScenarioTree& tree, const Strategy& s);

/// Scalar concave utility applied leafwise; `value` returns -inf outside
/// the domain.
struct ScalarConcave {
  std::function<double(double)> value;
  std::function<double(double)> d1;
  std::function<double(double)> d2;
  std::function<bool(double)> in_domain;
};

struct NewtonResult {
  Eigen::VectorXd theta;
  double objective = 0.0;
  double gradient_norm = 0.0;      ///< max-norm of the raw gradient
  double scaled_gradient_norm = 0.0;  ///< divided by sum_k w_k phi'(x_k)
  int iterations = 0;
  bool converged = false;
};

/// Damped Newton for max_theta sum_k w_k phi(offset_k + a_k . theta).
/// Converges when the scaled gradient max-norm is <= tol.
NewtonResult maximize_separable(const LeafDesign& design, const std::vector<double>& weights,
                                const std::vector<double>& offsets, const ScalarConcave& phi,
                                Eigen::VectorXd theta0, double tol, int max_iter);

}  // namespace stablab::detail
