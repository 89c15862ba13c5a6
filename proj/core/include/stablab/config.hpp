#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stablab/market.hpp"
#include "stablab/utility.hpp"

namespace stablab {

/// Family of utilities indexed by the sweep parameter.
///
/// Real-line kinds (indexed by delta >= 0, alpha_delta = alpha + alpha_slope * delta):
///   "exponential", "sine", "constant_shift"
/// Positive-line kinds (indexed by p < 0):
///   "power"       pure x^p / p
///   "log_sine"    members built from a log-sine base at p0 with the mixing
///                 function 1 / (1 - p + p0)
struct FamilySpec {
  std::string kind = "exponential";
  double a = 0.0;
  double omega = 1.0;
  double alpha = 1.0;
  double alpha_slope = 0.0;
  std::optional<double> anchor;
  double p0 = -1.0;

  bool on_real_line() const;
};

UtilityOnR family_member_r(const FamilySpec& family, double delta);
UtilityOnRPlus family_member_rplus(const FamilySpec& family, double p);

struct SweepSpec {
  std::string name;           ///< file stem, used for default output names
  std::string source;         ///< the config text, echoed into reports
  ScenarioTree tree;
  FamilySpec family;
  std::vector<double> grid;   ///< strictly decreasing
  std::vector<double> claim;  ///< B per leaf
  double x0 = 0.0;
  std::uint64_t seed = 0;
  double gradient_tol = 1e-12;
  double indifference_tol = 1e-10;
  /// Columns to emit; empty means all.
  std::vector<std::string> functionals;
  std::string csv_name;
  std::string json_name;
};

/// Parses a config document. `base_dir` resolves a relative "market.file".
SweepSpec parse_spec(const std::string& text, const std::string& name = "config",
                     const std::string& base_dir = ".");

/// Reads and parses a config file; ValidationError if it cannot be read.
SweepSpec load_spec(const std::string& path);

}  // namespace stablab
