#pragma once

#include <functional>
#include <utility>

namespace stablab::numerics {

struct RootOptions {
  double rel_tol = 1e-12;
  double abs_tol = 1e-300;
  int max_iter = 200;
};

/// Value and first derivative at a point.
using ValueAndSlope = std::function<std::pair<double, double>(double)>;

/// Root of a monotone function on [lo, hi] by Newton steps that fall back to
/// bisection whenever a step leaves the current bracket or stalls.
/// Requires f(lo) and f(hi) to have opposite signs (or one of them zero).
double safeguarded_root(const ValueAndSlope& f, double lo, double hi,
                        const RootOptions& opts = {});

/// Adaptive Gauss-Kronrod quadrature of f over the finite interval [a, b].
/// Orientation is respected: integrate(f, b, a) == -integrate(f, a, b).
double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol = 1e-14);

}  // namespace stablab::numerics
