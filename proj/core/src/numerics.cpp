#include "stablab/numerics.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <limits>

#include "stablab/errors.hpp"

namespace stablab::numerics {

double safeguarded_root(const ValueAndSlope& f, double lo, double hi,
                        const RootOptions& opts) {
  if (!(lo <= hi)) {
    throw ValidationError("safeguarded_root: empty bracket");
  }
  auto [flo, dlo] = f(lo);
  auto [fhi, dhi] = f(hi);
  (void)dlo;
  (void)dhi;
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0)) {
    throw BracketFailure("safeguarded_root: f(lo) and f(hi) share a sign");
  }
  // Orient so that f(neg) < 0 < f(pos).
  double neg = flo < 0.0 ? lo : hi;
  double pos = flo < 0.0 ? hi : lo;

  double x = 0.5 * (lo + hi);
  double step_prev = std::abs(hi - lo);
  double step = step_prev;
  for (int it = 0; it < opts.max_iter; ++it) {
    auto [fx, dfx] = f(x);
    if (fx == 0.0) return x;
    if (fx < 0.0) {
      neg = x;
    } else {
      pos = x;
    }
    double width = std::abs(pos - neg);
    double scale = std::max(std::abs(x), 1.0);
    if (width <= opts.rel_tol * scale || width <= opts.abs_tol) {
      return x;
    }
    double newton = dfx != 0.0 ? x - fx / dfx : std::numeric_limits<double>::quiet_NaN();
    bool inside = std::isfinite(newton) && (newton - neg) * (newton - pos) < 0.0;
    bool fast = std::abs(2.0 * fx) < std::abs(step_prev * dfx);
    step_prev = step;
    double next;
    if (inside && fast) {
      next = newton;
    } else {
      next = 0.5 * (neg + pos);
    }
    step = std::abs(next - x);
    if (step <= opts.rel_tol * scale * 1e-3) {
      return next;
    }
    x = next;
  }
  return x;
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol) {
  if (a == b) return 0.0;
  using boost::math::quadrature::gauss_kronrod;
  double err = 0.0;
  return gauss_kronrod<double, 31>::integrate(f, a, b, 15, rel_tol, &err);
}

}  // namespace stablab::numerics
