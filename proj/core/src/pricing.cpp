#include "stablab/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "stablab/errors.hpp"

namespace stablab {

PriceResult davis_price(const DualMeasure& dual, const std::vector<double>& claim) {
  if (claim.size() != dual.measure.weights.size()) {
    throw ValidationError("davis_price: claim and measure sizes differ");
  }
  PriceResult r;
  r.method = PriceMethod::davis;
  for (std::size_t k = 0; k < claim.size(); ++k) {
    if (!(claim[k] >= 0.0) || !std::isfinite(claim[k])) {
      throw ValidationError("davis_price: claim must be finite and non-negative");
    }
    r.price += dual.measure.weights[k] * claim[k];
  }
  auto [lo, hi] = std::minmax_element(claim.begin(), claim.end());
  r.bracket_lo = *lo;
  r.bracket_hi = *hi;
  return r;
}

PriceResult indifference_price(const ScenarioTree& tree, const UtilityOnR& u, double x0,
                               const std::vector<double>& claim, const IndifferenceOptions& opts) {
  if (claim.size() != tree.leaf_count()) {
    throw ValidationError("indifference_price: expected one claim value per leaf");
  }
  if (!(opts.tol > 0.0)) throw ValidationError("indifference_price: tol must be positive");
  for (double b : claim) {
    if (!std::isfinite(b)) throw ValidationError("indifference_price: non-finite claim");
  }

  const double target = solve_primal(tree, u, std::vector<double>(claim.size(), x0), opts.solver).value;
  SolverOptions solver = opts.solver;
  auto gap = [&](double price) {
    std::vector<double> xi(claim.size());
    for (std::size_t k = 0; k < xi.size(); ++k) xi[k] = x0 + claim[k] - price;
    PrimalSolution sol = solve_primal(tree, u, xi, solver);
    solver.initial = sol.strategy;
    return sol.value - target;
  };

  auto [lo_it, hi_it] = std::minmax_element(claim.begin(), claim.end());
  PriceResult r;
  r.method = PriceMethod::indifference;
  double lo = *lo_it;
  double hi = *hi_it;
  r.bracket_lo = lo;
  r.bracket_hi = hi;

  if (hi == lo) {
    r.price = lo;
    r.residual = std::abs(gap(lo));
    return r;
  }

  double f_lo = gap(lo);
  double f_hi = gap(hi);
  // Value noise at the endpoints is tolerated up to tol.
  if (f_lo < -opts.tol || f_hi > opts.tol) {
    throw BracketFailure("indifference_price: [min B, max B] does not bracket the price");
  }
  if (std::abs(f_lo) <= opts.tol && f_lo <= 0.0) {
    r.price = lo;
    r.residual = std::abs(f_lo);
    return r;
  }
  if (std::abs(f_hi) <= opts.tol && f_hi >= 0.0) {
    r.price = hi;
    r.residual = std::abs(f_hi);
    return r;
  }

  double mid = 0.5 * (lo + hi);
  double f_mid = 0.0;
  for (int it = 0; it < opts.max_iter; ++it) {
    mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    f_mid = gap(mid);
    r.iterations = it + 1;
    if (f_mid == 0.0) break;
    if (f_mid > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  r.price = mid;
  r.residual = std::abs(f_mid);
  if (r.residual > opts.tol) {
    throw NonConvergence("indifference_price: residual above tolerance", r.residual);
  }
  return r;
}

}  // namespace stablab
