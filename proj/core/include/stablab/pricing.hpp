#pragma once

#include <vector>

#include "stablab/entropic.hpp"
#include "stablab/market.hpp"
#include "stablab/utility.hpp"

namespace stablab {

enum class PriceMethod { davis, indifference };

struct PriceResult {
  double price = 0.0;
  PriceMethod method = PriceMethod::davis;
  /// |u(x0 + B - price) - u(x0)| for indifference prices, 0 for Davis.
  double residual = 0.0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  int iterations = 0;
};

/// E_Q[B] under the dual measure. Rejects claims with a negative leaf.
PriceResult davis_price(const DualMeasure& dual, const std::vector<double>& claim);

struct IndifferenceOptions {
  double tol = 1e-10;
  int max_iter = 60;
  SolverOptions solver{};
};

/// Buyer's price p with u(x0 + B - p) = u(x0), by bisection on
/// [min B, max B]. Every step re-solves the primal, warm-started from the
/// previous optimum. Throws BracketFailure if the endpoints do not bracket
/// the root.
PriceResult indifference_price(const ScenarioTree& tree, const UtilityOnR& u, double x0,
                               const std::vector<double>& claim,
                               const IndifferenceOptions& opts = {});

}  // namespace stablab
