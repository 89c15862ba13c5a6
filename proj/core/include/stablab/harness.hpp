#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "stablab/config.hpp"

namespace stablab {

enum class RateModel { f2_plus_g, inverse_one_minus_p, loglog_slope };

/// Which grid points enter a fit: the smaller half of the sweep parameter
/// (delta, or 1/(1-p)) or every usable point.
enum class FitSubset { asymptotic, full };

std::string to_string(RateModel m);
std::string to_string(FitSubset s);

struct RateFit {
  std::string functional;
  RateModel model = RateModel::loglog_slope;
  FitSubset subset = FitSubset::asymptotic;
  /// f2_plus_g: {C1, C2}; inverse_one_minus_p: {C}; loglog_slope: {slope, intercept}.
  std::vector<double> coefficients;
  double r2 = 0.0;
  std::size_t points = 0;
};

/// Points for a fit. `x` is the sweep abscissa (delta, or 1/(1-p)); `f` and
/// `g` feed the f2_plus_g model.
struct FitData {
  std::vector<double> x;
  std::vector<double> f;
  std::vector<double> g;
  std::vector<double> y;
};

/// Fits one model. Rows with x <= 0 are dropped, and for loglog_slope also
/// rows with y <= 0. Throws ValidationError when fewer points remain than
/// the model has parameters.
RateFit fit_points(const FitData& data, RateModel model, FitSubset subset);

struct SweepReport {
  std::string kind;  ///< "sweep-delta" or "sweep-p"
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::vector<RateFit> fits;
  /// Named per-row values that are reported in JSON only.
  std::vector<std::string> detail_columns;
  std::vector<std::vector<double>> details;
  bool complete = true;
  std::string error;
  std::uint64_t seed = 0;
  double gradient_tol = 0.0;
  double indifference_tol = 0.0;
  std::string config;

  std::size_t column(const std::string& name) const;
};

/// Requires at least four rows in the report.
RateFit fit_rate(const SweepReport& report, const std::string& functional, RateModel model,
                 FitSubset subset = FitSubset::asymptotic);

/// Columns of a delta sweep, in output order.
const std::vector<std::string>& delta_columns();
/// Columns of a p sweep, in output order.
const std::vector<std::string>& p_columns();

SweepReport sweep_delta(const SweepSpec& spec);
SweepReport sweep_p(const SweepSpec& spec);

/// Runs body(i) for i in [0, n) on up to STABLAB_THREADS threads (default:
/// hardware concurrency). Exceptions are captured per index.
std::vector<std::exception_ptr> parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace stablab
