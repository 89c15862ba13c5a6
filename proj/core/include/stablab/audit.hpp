#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "stablab/market.hpp"
#include "stablab/utility.hpp"

namespace stablab {

/// Both sides of E_Q[sup_t |Z_t|^q] <= 2^q / (1 - q) E_Q[|Z_T|]^q.
struct SupMoment {
  double lhs = 0.0;
  double rhs = 0.0;
};

SupMoment sup_moment_bound(const ScenarioTree& tree, const Measure& m, const AdaptedProcess& z, double q);

/// A random m-supermartingale with Z_0 = 0: an m-martingale with random
/// increments minus a non-negative predictable drift.
AdaptedProcess random_supermartingale(const ScenarioTree& tree, const Measure& m, std::mt19937_64& rng);

struct MomentAudit {
  double q = 0.5;
  double worst_ratio = 0.0;  ///< max lhs / rhs over trials with rhs > 0
  std::size_t violations = 0;
};

struct SandwichCheck {
  std::string family;
  double violation = 0.0;
};

struct AuditReport {
  std::uint64_t seed = 0;
  std::size_t trials = 0;
  std::vector<MomentAudit> moments;
  std::vector<SandwichCheck> conjugate_sandwich;
  std::vector<SandwichCheck> power_sandwich;

  /// No moment violations and every sandwich violation <= tol.
  bool passed(double tol = 1e-8) const;
};

/// Real-line families used by the shipped configs, one entry per grid member.
std::vector<std::pair<std::string, UtilityOnR>> shipped_families_r();
/// Positive-line families used by the shipped configs.
std::vector<std::pair<std::string, UtilityOnRPlus>> shipped_families_rplus();

/// Three-step trinomial tree used when no market is given.
ScenarioTree default_audit_tree();

/// Checks the sup-moment bound for q in {0.25, 0.5, 0.75} on `trials` random
/// supermartingales under the minimal entropy measure of `tree`, and runs
/// the conjugate and power sandwich audits on the given families.
/// Requires trials >= 100.
AuditReport audit_probabilistic_lemmas(const ScenarioTree& tree, std::uint64_t seed, std::size_t trials,
                                       const std::vector<std::pair<std::string, UtilityOnR>>& families_r,
                                       const std::vector<std::pair<std::string, UtilityOnRPlus>>& families_rplus);

}  // namespace stablab
