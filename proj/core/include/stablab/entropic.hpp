#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "stablab/market.hpp"
#include "stablab/utility.hpp"

namespace stablab {

struct SolverOptions {
  /// Stop when the max-norm of the objective gradient falls below this.
  double gradient_tol = 1e-12;
  int max_iter = 200;
  /// Solve the problem for alpha*U(x/alpha) with endowment alpha*xi and map
  /// the strategy back by 1/alpha.
  bool normalize_risk_aversion = false;
  /// Warm start (share strategy).
  std::optional<Strategy> initial;
};

/// Optimum of sup_H E_P[U((H.S)_T + xi)].
struct PrimalSolution {
  Strategy strategy;             ///< H, shares
  AdaptedProcess wealth;         ///< X = H.S, X_0 = 0
  std::vector<double> total;     ///< X_T + xi per leaf
  std::vector<double> endowment; ///< xi per leaf
  double value = 0.0;            ///< u = E_P[U(X_T + xi)]
  double gradient_norm = 0.0;
  int iterations = 0;
};

/// Q with y dQ/dP = U'(X_T + xi).
struct DualMeasure {
  Measure measure;
  double multiplier = 1.0;
};

/// Maximises the strictly concave objective over per-node share positions
/// by damped Newton. Throws NoMartingaleMeasure if the tree has arbitrage
/// and NonConvergence if the gradient cannot be driven below tolerance.
PrimalSolution solve_primal(const ScenarioTree& tree, const UtilityOnR& u,
                            const std::vector<double>& endowment,
                            const SolverOptions& opts = {});

/// Reads the dual measure off the first-order conditions. Throws
/// NonConvergence if the resulting measure is not a martingale measure to
/// within `tol`.
DualMeasure extract_dual(const ScenarioTree& tree, const UtilityOnR& u,
                         const PrimalSolution& sol, double tol = 1e-8);

/// Minimiser of E_P[V(dQ/dP)] over martingale measures, computed directly in
/// the space of leaf weights (infeasible-start equality-constrained Newton).
/// The multiplier is the y solving E_Q[I(y dQ/dP)] = 0. For exponential U the
/// pair is the dual of the zero-endowment problem; for other utilities the
/// dual optimiser also minimises over the scale y and may differ.
DualMeasure minimal_entropy_measure(const ScenarioTree& tree, const UtilityOnR& u,
                                    double tol = 1e-13, int max_iter = 200);

/// sum_leaf P(leaf) V(m(leaf)/P(leaf)).
double generalized_entropy(const ScenarioTree& tree, const Measure& m, const UtilityOnR& u);

struct OptimalityReport {
  /// max over nodes of |E_Q[X_{t+1} - X_t | node]|.
  double martingale_defect = 0.0;
  /// max over probes and nodes of E_probe[X_{t+1} - X_t | node] (<= 0 expected).
  double supermartingale_slack = 0.0;
  /// max over leaves of |y dQ/dP - U'(X_T + xi)|.
  double first_order_residual = 0.0;
  std::size_t probe_count = 0;
};

/// Checks the martingale / supermartingale structure of the optimal wealth.
/// Every probe must be a martingale measure (ValidationError otherwise).
OptimalityReport verify_optimality(const ScenarioTree& tree, const UtilityOnR& u,
                                   const PrimalSolution& sol, const DualMeasure& dual,
                                   const std::vector<Measure>& probes,
                                   double probe_tol = 1e-10);

/// Vertices of the martingale polytope (capped) plus random interior points.
std::vector<Measure> default_probes(const ScenarioTree& tree, std::uint64_t seed,
                                    std::size_t max_vertices = 256,
                                    std::size_t interior = 16);

/// min over y > 0 of E_P[V(y dm/dP)] + y E_m[xi]: the dual bound for m.
double dual_bound(const ScenarioTree& tree, const UtilityOnR& u, const Measure& m,
                  const std::vector<double>& endowment);

/// E_P[V(y dm/dP)] + y E_m[xi] at a given y.
double dual_objective(const ScenarioTree& tree, const UtilityOnR& u, const Measure& m,
                      const std::vector<double>& endowment, double y);

}  // namespace stablab
