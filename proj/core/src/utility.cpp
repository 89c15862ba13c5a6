#include "stablab/utility.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "stablab/errors.hpp"
#include "stablab/numerics.hpp"

namespace stablab {

namespace {

constexpr double kTailEps = 1e-18;

double safe_log(double y) {
  if (!(y > 0.0)) throw ValidationError("argument must be positive");
  return std::log(y);
}

}  // namespace

// ---------------------------------------------------------------- UtilityOnR

double UtilityOnR::ratio(double x) const {
  switch (ratio_.kind) {
    case RatioKind::sine:
      return 1.0 + amp_ * std::sin(ratio_.omega * x);
    case RatioKind::constant_shift:
      return 1.0 + amp_;
    case RatioKind::none:
      break;
  }
  return 1.0;
}

double UtilityOnR::ratio_slope(double x) const {
  if (ratio_.kind == RatioKind::sine) {
    return amp_ * ratio_.omega * std::cos(ratio_.omega * x);
  }
  return 0.0;
}

double UtilityOnR::marginal(double x) const { return ratio(x) * std::exp(-alpha_ * x); }

double UtilityOnR::curvature(double x) const {
  return std::exp(-alpha_ * x) * (ratio_slope(x) - alpha_ * ratio(x));
}

double UtilityOnR::value(double x) const {
  if (closed_form()) {
    return anchor_ + ratio(0.0) * (1.0 - std::exp(-alpha_ * x)) / alpha_;
  }
  if (x == std::numeric_limits<double>::infinity()) return supremum_;
  // Split long ranges so each panel sees a bounded number of oscillations.
  const double panel = std::max(1.0, 2.0 * std::numbers::pi / std::abs(ratio_.omega));
  const int pieces = std::max(1, static_cast<int>(std::ceil(std::abs(x) / panel)));
  double sum = 0.0;
  auto f = [this](double t) { return marginal(t); };
  for (int k = 0; k < pieces; ++k) {
    double a = x * k / pieces;
    double b = x * (k + 1) / pieces;
    sum += numerics::integrate(f, a, b);
  }
  return anchor_ + sum;
}

double UtilityOnR::supremum() const { return supremum_; }

double UtilityOnR::inverse_marginal(double y) const {
  double ly = safe_log(y);
  if (closed_form()) {
    return -(ly - std::log(ratio(0.0))) / alpha_;
  }
  // ln U'(x) - ln y is strictly decreasing; the ratio bounds bracket the root.
  double lo = -(ly - std::log(lower_)) / alpha_;
  double hi = -(ly - std::log(upper_)) / alpha_;
  auto h = [this, ly](double x) {
    double r = ratio(x);
    return std::pair{std::log(r) - alpha_ * x - ly, ratio_slope(x) / r - alpha_};
  };
  numerics::RootOptions opts;
  opts.rel_tol = 1e-15;
  return numerics::safeguarded_root(h, lo, hi, opts);
}

double UtilityOnR::conjugate(double y) const {
  double x = inverse_marginal(y);
  return value(x) - x * y;
}

double UtilityOnR::conjugate_curvature(double y) const {
  return -1.0 / curvature(inverse_marginal(y));
}

UtilityOnR make_exponential(double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw ValidationError("exponential utility: alpha must be positive");
  }
  UtilityOnR u;
  u.alpha_ = alpha;
  u.anchor_ = -1.0 / alpha;
  u.supremum_ = 0.0;
  return u;
}

UtilityOnR make_perturbed_exponential(double delta, double alpha_delta,
                                      const RatioSpec& ratio,
                                      const FamilyOptions& opts) {
  if (!(delta >= 0.0)) throw ValidationError("perturbed exponential: delta must be >= 0");
  UtilityOnR u = make_exponential(alpha_delta);
  u.delta_ = delta;
  u.ratio_ = ratio;
  u.amp_ = ratio.kind == RatioKind::none ? 0.0 : ratio.a * delta;
  const double amp = std::abs(u.amp_);

  if (!opts.unchecked) {
    if (ratio.kind != RatioKind::none && amp >= 1.0) {
      throw ValidationError("perturbed exponential: |a|*delta must be < 1");
    }
    if (ratio.kind == RatioKind::sine &&
        !(amp * std::abs(ratio.omega) < alpha_delta * (1.0 - amp))) {
      throw ValidationError(
          "perturbed exponential: sine ratio violates monotonicity "
          "(need a*delta*omega < alpha*(1 - a*delta))");
    }
  }
  switch (ratio.kind) {
    case RatioKind::sine:
      u.lower_ = 1.0 - amp;
      u.upper_ = 1.0 + amp;
      break;
    case RatioKind::constant_shift:
      u.lower_ = std::min(1.0, 1.0 + u.amp_);
      u.upper_ = std::max(1.0, 1.0 + u.amp_);
      break;
    case RatioKind::none:
      break;
  }
  u.f_ = amp;
  u.anchor_ = opts.anchor.value_or(-1.0 / alpha_delta);

  if (u.closed_form()) {
    u.supremum_ = u.anchor_ + u.ratio(0.0) / alpha_delta;
  } else {
    // Tail beyond L is below upper * exp(-alpha L) / alpha.
    double length = std::log(std::max(u.upper_, 1.0) / (alpha_delta * kTailEps)) / alpha_delta;
    u.supremum_ = u.value(length);
  }
  return u;
}

// ------------------------------------------------------------ UtilityOnRPlus

double UtilityOnRPlus::ratio(double x) const {
  if (pure()) return 1.0;
  return 1.0 + mix_ * shape_a_ * std::sin(shape_omega_ * std::log(x));
}

double UtilityOnRPlus::marginal(double x) const {
  return ratio(x) * std::exp((p_ - 1.0) * std::log(x));
}

double UtilityOnRPlus::curvature(double x) const {
  double lx = std::log(x);
  double slope = pure() ? 0.0 : mix_ * shape_a_ * shape_omega_ * std::cos(shape_omega_ * lx);
  return std::exp((p_ - 2.0) * lx) * ((p_ - 1.0) * ratio(x) + slope);
}

double UtilityOnRPlus::value(double x) const {
  if (!(x > 0.0)) return -std::numeric_limits<double>::infinity();
  double lx = std::log(x);
  const double base = std::expm1(p_ * lx) / p_;
  if (pure()) return anchor_ + base;
  // With s = ln t the integrand is e^{ps} (1 + c sin(omega s)), which has an
  // elementary antiderivative.
  const double w = shape_omega_;
  const double osc =
      (std::exp(p_ * lx) * (p_ * std::sin(w * lx) - w * std::cos(w * lx)) + w) / (p_ * p_ + w * w);
  return anchor_ + base + mix_ * shape_a_ * osc;
}

double UtilityOnRPlus::inverse_marginal(double y) const {
  double ly = safe_log(y);
  if (pure()) return std::exp(ly / (p_ - 1.0));
  double lo = (ly - std::log(lower_)) / (p_ - 1.0);
  double hi = (ly - std::log(upper_)) / (p_ - 1.0);
  if (lo > hi) std::swap(lo, hi);
  const double amp = mix_ * shape_a_;
  auto h = [this, ly, amp](double s) {
    double r = 1.0 + amp * std::sin(shape_omega_ * s);
    return std::pair{(p_ - 1.0) * s + std::log(r) - ly,
                     (p_ - 1.0) + amp * shape_omega_ * std::cos(shape_omega_ * s) / r};
  };
  numerics::RootOptions opts;
  opts.rel_tol = 1e-15;
  return std::exp(numerics::safeguarded_root(h, lo, hi, opts));
}

UtilityOnRPlus make_power(double p) {
  if (!(p < 0.0) || !std::isfinite(p)) throw ValidationError("power utility: p must be < 0");
  UtilityOnRPlus u;
  u.p_ = p;
  u.anchor_ = 1.0 / p;
  return u;
}

UtilityOnRPlus make_log_sine_power(double p, double a, double omega,
                                   std::optional<double> anchor) {
  UtilityOnRPlus u = make_power(p);
  if (!(a >= 0.0 && a < 1.0)) throw ValidationError("log-sine power: a must lie in [0, 1)");
  if (!(a * std::abs(omega) < (1.0 - p) * (1.0 - a))) {
    throw ValidationError("log-sine power: concavity needs a*omega < (1-p)(1-a)");
  }
  u.mix_ = 1.0;
  u.shape_a_ = a;
  u.shape_omega_ = omega;
  u.lower_ = 1.0 - a;
  u.upper_ = 1.0 + a;
  u.anchor_ = anchor.value_or(1.0 / p);
  return u;
}

UtilityOnRPlus make_power_family_member(const UtilityOnRPlus& base, double p,
                                        const std::function<double(double)>& fmix) {
  const double p0 = base.p();
  if (!(p <= p0)) throw ValidationError("power family: p must not exceed the base exponent");
  if (std::abs(fmix(p0) - 1.0) > 1e-12) {
    throw ValidationError("power family: fmix(p0) must equal 1");
  }
  const double w = fmix(p);
  if (!(w > 0.0 && w <= 1.0)) throw ValidationError("power family: fmix(p) outside (0, 1]");
  // Probe limsup (1-p) fmix(p) < inf: a bounded sequence must not keep growing.
  double prev = 0.0;
  for (int k = 2; k <= 6; ++k) {
    double q = p0 - std::pow(10.0, k);
    double v = (1.0 - q) * fmix(q);
    if (!std::isfinite(v)) throw ValidationError("power family: fmix is not finite");
    if (k == 6 && v > 2.0 * prev + 1e-12) {
      throw ValidationError("power family: (1-p) fmix(p) appears unbounded");
    }
    prev = v;
  }
  UtilityOnRPlus u = make_power(p);
  u.mix_ = base.mix_ * w;
  u.shape_a_ = base.shape_a_;
  u.shape_omega_ = base.shape_omega_;
  u.lower_ = w * (base.lower_ - 1.0) + 1.0;
  u.upper_ = w * (base.upper_ - 1.0) + 1.0;
  return u;
}

std::function<double(double)> inverse_linear_mix(double p0) {
  return [p0](double p) { return 1.0 / (1.0 - p + p0); };
}

UtilityField UtilityField::make(UtilityOnRPlus u, std::vector<double> weight,
                                std::optional<double> k1, std::optional<double> k2) {
  if (weight.empty()) throw ValidationError("utility field: no terminal weights");
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (double d : weight) {
    if (!(d > 0.0) || !std::isfinite(d)) {
      throw ValidationError("utility field: D_T must be positive and finite");
    }
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
  UtilityField field{std::move(u), std::move(weight), k1.value_or(lo), k2.value_or(hi)};
  if (!(field.k1 > 0.0 && field.k1 <= lo && hi <= field.k2)) {
    throw ValidationError("utility field: D_T outside [k1, k2]");
  }
  return field;
}

// ---------------------------------------------------------------- audits

std::vector<double> uniform_grid(double lo, double hi, std::size_t n) {
  if (n < 2) return {lo};
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) {
    g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  return g;
}

std::vector<double> log_grid(double lo_exp, double hi_exp, std::size_t n) {
  auto g = uniform_grid(lo_exp, hi_exp, n);
  for (double& v : g) v = std::pow(10.0, v);
  return g;
}

std::vector<double> default_grid_r() { return uniform_grid(-20.0, 20.0, 2001); }
std::vector<double> default_grid_rplus() { return log_grid(-6.0, 4.0, 2001); }

namespace {

template <class RatioFn, class LogMarginalFn>
RatioCertificate certify(std::span<const double> grid, RatioFn ratio, LogMarginalFn log_marginal) {
  RatioCertificate c{std::numeric_limits<double>::infinity(),
                     -std::numeric_limits<double>::infinity(), 0.0, true};
  double prev = std::numeric_limits<double>::infinity();
  for (double x : grid) {
    double r = ratio(x);
    c.lower = std::min(c.lower, r);
    c.upper = std::max(c.upper, r);
    c.sup_deviation = std::max(c.sup_deviation, std::abs(r - 1.0));
    double lm = log_marginal(x);
    if (!(lm < prev)) c.monotone = false;
    prev = lm;
  }
  return c;
}

}  // namespace

RatioCertificate certify_ratio_bounds(const UtilityOnR& u, std::span<const double> grid) {
  return certify(
      grid, [&](double x) { return u.ratio(x); },
      [&](double x) { return std::log(u.ratio(x)) - u.alpha() * x; });
}

RatioCertificate certify_ratio_bounds(const UtilityOnRPlus& u, std::span<const double> grid) {
  return certify(
      grid, [&](double x) { return u.ratio(x); },
      [&](double x) { return std::log(u.ratio(x)) + (u.p() - 1.0) * std::log(x); });
}

double conjugate_sandwich_audit(const UtilityOnR& u, std::span<const double> ygrid) {
  const double alpha = u.alpha();
  auto vt = [alpha](double y) { return (y * std::log(y) - y) / alpha; };
  const double v0 = u.supremum();
  double worst = 0.0;
  for (double y : ygrid) {
    double v = u.conjugate(y);
    double lower = u.upper() * vt(y / u.upper()) + v0;
    double upper = u.lower() * vt(y / u.lower()) + v0;
    worst = std::max({worst, lower - v, v - upper});
  }
  return worst;
}

double power_sandwich_audit(const UtilityOnRPlus& u, std::span<const double> xgrid) {
  double worst = 0.0;
  const double p = u.p();
  for (double x : xgrid) {
    double base = std::expm1(p * std::log(x)) / p;
    double ux = u.value(x);
    if (!std::isfinite(base) || !std::isfinite(ux)) continue;
    bool above_one = x >= 1.0;
    double lower = (above_one ? u.lower() : u.upper()) * base + u.anchor();
    double upper = (above_one ? u.upper() : u.lower()) * base + u.anchor();
    double scale = std::max(1.0, std::abs(ux));
    worst = std::max({worst, (lower - ux) / scale, (ux - upper) / scale});
  }
  return worst;
}

}  // namespace stablab
