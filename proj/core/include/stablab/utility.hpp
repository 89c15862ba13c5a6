#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace stablab {

/// Shape of the marginal-utility ratio against the comparison exponential.
///   none:           F(x) = 1
///   sine:           F(x) = 1 + a*delta*sin(omega*x)
///   constant_shift: F(x) = 1 + a*delta
enum class RatioKind { none, sine, constant_shift };

struct RatioSpec {
  RatioKind kind = RatioKind::none;
  double a = 0.0;
  double omega = 1.0;
};

struct FamilyOptions {
  /// U(0). Defaults to -1/alpha, which matches the exponential member.
  std::optional<double> anchor;
  /// Skip the monotonicity and ratio-range checks (diagnostic use only).
  bool unchecked = false;
};

/// Strictly concave utility on the real line whose marginal is
/// U'(x) = F(x) exp(-alpha x) with l <= F <= u.
class UtilityOnR {
 public:
  double value(double x) const;
  double marginal(double x) const;
  /// U''(x).
  double curvature(double x) const;
  /// (U')^{-1}(y), y > 0.
  double inverse_marginal(double y) const;
  /// V(y) = sup_x (U(x) - x y), y > 0.
  double conjugate(double y) const;
  /// V'(y) = -I(y).
  double conjugate_slope(double y) const { return -inverse_marginal(y); }
  /// V''(y) = -1 / U''(I(y)).
  double conjugate_curvature(double y) const;
  /// lim_{x -> inf} U(x), which equals V(0).
  double supremum() const;

  /// U'(x) / exp(-alpha x).
  double ratio(double x) const;
  double ratio_slope(double x) const;

  double alpha() const { return alpha_; }
  double delta() const { return delta_; }
  double lower() const { return lower_; }
  double upper() const { return upper_; }
  /// sup_x |F(x) - 1|.
  double f() const { return f_; }
  /// |alpha - 1|.
  double g() const { return std::abs(alpha_ - 1.0); }
  double anchor() const { return anchor_; }
  const RatioSpec& ratio_spec() const { return ratio_; }
  bool closed_form() const { return ratio_.kind != RatioKind::sine || ratio_.a * delta_ == 0.0; }

 private:
  friend UtilityOnR make_exponential(double alpha);
  friend UtilityOnR make_perturbed_exponential(double delta, double alpha_delta,
                                               const RatioSpec& ratio,
                                               const FamilyOptions& opts);

  double alpha_ = 1.0;
  double delta_ = 0.0;
  RatioSpec ratio_{};
  double amp_ = 0.0;  // a * delta
  double lower_ = 1.0;
  double upper_ = 1.0;
  double f_ = 0.0;
  double anchor_ = -1.0;
  double supremum_ = 0.0;
};

/// U(x) = -(1/alpha) exp(-alpha x).
UtilityOnR make_exponential(double alpha);

/// U'(x) = F_delta(x) exp(-alpha_delta x) with F from `ratio`; values by
/// quadrature anchored at U(0).
UtilityOnR make_perturbed_exponential(double delta, double alpha_delta,
                                      const RatioSpec& ratio,
                                      const FamilyOptions& opts = {});

/// Strictly concave utility on (0, inf) with U'(x) = F(x) x^{p-1},
/// F(x) = 1 + w (1 + a sin(omega ln x) - 1). w = 0 or a = 0 gives x^p/p.
class UtilityOnRPlus {
 public:
  double value(double x) const;
  double marginal(double x) const;
  double curvature(double x) const;
  double inverse_marginal(double y) const;

  /// U'(x) / x^{p-1}.
  double ratio(double x) const;

  double p() const { return p_; }
  double lower() const { return lower_; }
  double upper() const { return upper_; }
  /// U(1).
  double anchor() const { return anchor_; }
  /// Weight w of the base deviation (fmix composed along the family).
  double mix() const { return mix_; }
  double shape_amplitude() const { return shape_a_; }
  double shape_frequency() const { return shape_omega_; }
  bool pure() const { return mix_ * shape_a_ == 0.0; }

 private:
  friend UtilityOnRPlus make_power(double p);
  friend UtilityOnRPlus make_log_sine_power(double p, double a, double omega,
                                            std::optional<double> anchor);
  friend UtilityOnRPlus make_power_family_member(const UtilityOnRPlus& base, double p,
                                                 const std::function<double(double)>& fmix);

  double p_ = -1.0;
  double mix_ = 0.0;
  double shape_a_ = 0.0;
  double shape_omega_ = 1.0;
  double lower_ = 1.0;
  double upper_ = 1.0;
  double anchor_ = -1.0;
};

/// U(x) = x^p / p, p < 0.
UtilityOnRPlus make_power(double p);

/// Power-comparable utility with F(x) = 1 + a sin(omega ln x); certificate
/// (1 - a, 1 + a). Requires a*omega < (1 - p)(1 - a).
UtilityOnRPlus make_log_sine_power(double p, double a, double omega,
                                   std::optional<double> anchor = std::nullopt);

/// U'_p(x) = fmix(p) x^{p-p0} U'(x) + (1 - fmix(p)) x^{p-1} for p <= p0,
/// where U is `base` at exponent p0. Certificate
/// l_p = fmix(p)(l - 1) + 1, u_p = fmix(p)(u - 1) + 1.
UtilityOnRPlus make_power_family_member(const UtilityOnRPlus& base, double p,
                                        const std::function<double(double)>& fmix);

/// fmix(p) = 1 / (1 - p + p0): equals 1 at p0 and (1 - p) fmix(p) -> 1.
std::function<double(double)> inverse_linear_mix(double p0);

/// U_p(x) = D_T U(x) at the leaves.
struct UtilityField {
  UtilityOnRPlus utility;
  std::vector<double> weight;  ///< D_T per leaf
  double k1 = 1.0;
  double k2 = 1.0;

  /// Validates 0 < k1 <= D_T <= k2; bounds default to min/max of D_T.
  static UtilityField make(UtilityOnRPlus u, std::vector<double> weight,
                           std::optional<double> k1 = std::nullopt,
                           std::optional<double> k2 = std::nullopt);
};

struct RatioCertificate {
  double lower = 1.0;
  double upper = 1.0;
  double sup_deviation = 0.0;
  bool monotone = true;
};

std::vector<double> uniform_grid(double lo, double hi, std::size_t n);
/// 10^lo_exp .. 10^hi_exp, log-spaced.
std::vector<double> log_grid(double lo_exp, double hi_exp, std::size_t n);

/// Default certification grids: [-20, 20] and 10^[-6, 4], 2001 points each.
std::vector<double> default_grid_r();
std::vector<double> default_grid_rplus();

RatioCertificate certify_ratio_bounds(const UtilityOnR& u, std::span<const double> grid);
RatioCertificate certify_ratio_bounds(const UtilityOnRPlus& u, std::span<const double> grid);

/// Largest violation of
///   u Vt(y/u) + V(0) <= V(y) <= l Vt(y/l) + V(0),  Vt(y) = (y ln y - y)/alpha
/// over the grid (0 when the sandwich holds).
double conjugate_sandwich_audit(const UtilityOnR& u, std::span<const double> ygrid);

/// Largest violation of the two-sided sandwich of U_p between the power
/// utilities with certificate (l_p, u_p), anchored at U_p(1).
double power_sandwich_audit(const UtilityOnRPlus& u, std::span<const double> xgrid);

}  // namespace stablab
