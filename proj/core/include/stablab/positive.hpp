#pragma once

#include <cstdint>
#include <vector>

#include "stablab/entropic.hpp"
#include "stablab/market.hpp"
#include "stablab/utility.hpp"

namespace stablab {

struct PositiveOptions {
  /// Tolerance on the gradient divided by E_P[D U'(X_T)].
  double gradient_tol = 1e-12;
  int max_iter = 200;
};

/// Optimum of sup_pi E_P[D_T U_p(X_T(pi))] with X_0 = x0.
struct PositiveSolution {
  double p = -1.0;
  double x0 = 1.0;
  Strategy fractions;            ///< pi, fraction of current wealth
  Strategy shares;               ///< the same strategy in shares
  AdaptedProcess wealth;         ///< X, strictly positive
  std::vector<double> weight;    ///< D_T per leaf
  double value = 0.0;            ///< E_P[D_T U_p(X_T)]
  double multiplier = 0.0;       ///< y_p = E_P[D_T U'_p(X_T) X_T] / x0
  std::vector<double> deflator;  ///< Y_T = D_T U'_p(X_T) / y_p per leaf
  double gradient_norm = 0.0;
  int iterations = 0;
};

/// Maximises over share positions, where the objective is concave, and
/// reports the equivalent fractions pi = H S_prev / X_prev. Throws
/// AdmissibilityBoundaryHit if the optimum leaves X > 0 and NonConvergence
/// if Newton stalls above tolerance.
PositiveSolution solve_power_field(const ScenarioTree& tree, const UtilityField& field,
                                   double x0, const PositiveOptions& opts = {});

/// L per node for the power utility x^p / p with L_T = D_T, by one-step
/// dynamic programming: L_t = min_pi E[L_{t+1} (1 + pi dR)^p | F_t].
struct OpportunityProcess {
  AdaptedProcess values;
  Strategy fractions;  ///< the one-step minimisers
};

OpportunityProcess opportunity_process(const ScenarioTree& tree, double p,
                                       const std::vector<double>& weight,
                                       const PositiveOptions& opts = {});

/// Optimal monetary positions for sup E_P[-exp(B - x0 - (theta . R)_T)].
struct ExponentialHedge {
  Strategy amounts;  ///< theta^i = H^i S^i_prev, stored in fraction mode
  double value = 0.0;
  PrimalSolution primal;
};

ExponentialHedge exponential_hedge(const ScenarioTree& tree, const std::vector<double>& claim,
                                   double x0, const SolverOptions& opts = {});

/// dP_p/dP proportional to D_T (X_T)^p for the pure-power optimum X.
struct AuxMeasure {
  Measure measure;
  /// max over audited wealths of E_{P_p}[X_T / X_T^pure] (X_0 = x0).
  double numeraire_max = 0.0;
  std::size_t audited = 0;
};

/// Builds P_p and runs the numeraire audit against `trials` random
/// admissible wealth processes. Throws AuditFailure if some audited wealth
/// exceeds 1 + audit_tol.
AuxMeasure auxiliary_measure(const ScenarioTree& tree, const PositiveSolution& pure,
                             std::uint64_t seed = 0, std::size_t trials = 10,
                             double audit_tol = 1e-9);

struct RatioDiagnostics {
  AdaptedProcess ratio;  ///< r = X / X_pure per node
  /// E_{P_p}[|p| |F(X_T) r_T^{p-1} - 1| |1 - r_T|].
  double lemma_quantity = 0.0;
  /// The same expectation without the |p| factor.
  double lemma_quantity_unscaled = 0.0;
  /// 2 max{(u-1)(u^{1/(1-p)} - 1), (1-l)(1-l^{1/(1-p)})} for the certificate (l, u).
  double lemma_bound = 0.0;
  /// E_{P_p}[|r_T^p - 1|].
  double power_gap = 0.0;
  /// E_{P_p}[sum_t (r_t^p / r_{t-1}^p - 1)^2], the bracket of the stochastic
  /// logarithm of r^p.
  double log_bracket = 0.0;
  /// max over nodes of E_{P_p}[r_{t+1} | node] - r_t (<= 0 expected).
  double supermartingale_defect = 0.0;
  /// min over nodes of E_{P_p}[r^p_{t+1} | node] - r^p_t (>= 0 expected).
  double submartingale_defect = 0.0;
};

RatioDiagnostics ratio_diagnostics(const ScenarioTree& tree, const UtilityOnRPlus& general_utility,
                                   const PositiveSolution& general, const PositiveSolution& pure,
                                   const AuxMeasure& aux);

/// Predictable bracket under m of ((1-p) pi_p - theta) against the return
/// increments.
double scaled_strategy_distance(const ScenarioTree& tree, const Strategy& pi, const ExponentialHedge& hedge,
                                double p, const Measure& m);

/// max over non-terminal nodes and assets of |(1-p) pi_p - theta|.
double scaled_strategy_gap(const ScenarioTree& tree, const Strategy& pi, const ExponentialHedge& hedge,
                           double p);

}  // namespace stablab
