#include "stablab/audit.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "stablab/entropic.hpp"
#include "stablab/errors.hpp"
#include "stablab/report.hpp"

namespace stablab {

namespace {

const std::vector<double> kDeltaGrid = {0.2, 0.1, 0.05, 0.025, 0.0125};
const std::vector<double> kPGrid = {-3.0, -7.0, -15.0, -31.0, -63.0};

std::string tagged(const std::string& name, double v) { return name + "@" + format_double(v); }

}  // namespace

SupMoment sup_moment_bound(const ScenarioTree& tree, const Measure& m, const AdaptedProcess& z, double q) {
  if (!(q > 0.0 && q < 1.0)) throw ValidationError("sup_moment_bound: q must lie in (0,1)");
  SupMoment out;
  double mean_abs = 0.0;
  for (int leaf : tree.leaves()) {
    double w = m.weights[static_cast<std::size_t>(tree.node(leaf).leaf_index)];
    double sup = 0.0;
    for (int n = leaf; n >= 0; n = tree.node(n).parent) sup = std::max(sup, std::abs(z[n]));
    out.lhs += w * std::pow(sup, q);
    mean_abs += w * std::abs(z[leaf]);
  }
  out.rhs = std::pow(2.0, q) / (1.0 - q) * std::pow(mean_abs, q);
  return out;
}

AdaptedProcess random_supermartingale(const ScenarioTree& tree, const Measure& m, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit;
  std::vector<double> mass = node_mass(tree, m);
  // Per-path scales spread over several orders of magnitude; drift is off,
  // small, or dominant.
  const double drift_scale = std::array<double, 3>{0.0, 0.1, 3.0}[static_cast<std::size_t>(unit(rng) * 3.0) % 3];
  AdaptedProcess z;
  z.values.assign(tree.size(), 0.0);
  for (int n : tree.internal_nodes()) {
    const auto& ch = tree.node(n).children;
    std::vector<double> cp = conditional_child_probs(tree, mass, n);
    double scale = std::exp(2.0 * normal(rng));
    std::vector<double> inc(ch.size());
    double mean = 0.0;
    for (std::size_t c = 0; c < ch.size(); ++c) {
      inc[c] = scale * normal(rng);
      mean += cp[c] * inc[c];
    }
    double drift = drift_scale * scale * std::abs(normal(rng));
    for (std::size_t c = 0; c < ch.size(); ++c) {
      z.values[static_cast<std::size_t>(ch[c])] = z[n] + inc[c] - mean - drift;
    }
  }
  return z;
}

bool AuditReport::passed(double tol) const {
  for (const auto& m : moments) {
    if (m.violations) return false;
  }
  for (const auto& s : conjugate_sandwich) {
    if (!(s.violation <= tol)) return false;
  }
  for (const auto& s : power_sandwich) {
    if (!(s.violation <= tol)) return false;
  }
  return true;
}

std::vector<std::pair<std::string, UtilityOnR>> shipped_families_r() {
  std::vector<std::pair<std::string, UtilityOnR>> out;
  out.emplace_back("exponential", make_exponential(1.0));
  for (double d : kDeltaGrid) {
    out.emplace_back(tagged("exponential(1+delta)", d), make_exponential(1.0 + d));
    out.emplace_back(tagged("sine(a=0.2,omega=1)", d),
                     make_perturbed_exponential(d, 1.0, {RatioKind::sine, 0.2, 1.0}));
    out.emplace_back(tagged("constant_shift(a=0.2)", d),
                     make_perturbed_exponential(d, 1.0, {RatioKind::constant_shift, 0.2, 1.0}));
  }
  return out;
}

std::vector<std::pair<std::string, UtilityOnRPlus>> shipped_families_rplus() {
  std::vector<std::pair<std::string, UtilityOnRPlus>> out;
  const UtilityOnRPlus base = make_log_sine_power(-3.0, 0.2, 1.0);
  for (double p : kPGrid) {
    out.emplace_back(tagged("power", p), make_power(p));
    out.emplace_back(tagged("log_sine(p0=-3,a=0.2,omega=1)", p),
                     make_power_family_member(base, p, inverse_linear_mix(-3.0)));
  }
  return out;
}

ScenarioTree default_audit_tree() {
  return ScenarioTree::from_lattice(LatticeSpec{1.0, {1.25, 1.0, 0.8}, {0.3, 0.4, 0.3}, 3});
}

AuditReport audit_probabilistic_lemmas(const ScenarioTree& tree, std::uint64_t seed, std::size_t trials,
                                       const std::vector<std::pair<std::string, UtilityOnR>>& families_r,
                                       const std::vector<std::pair<std::string, UtilityOnRPlus>>& families_rplus) {
  if (trials < 100) throw ValidationError("audit: at least 100 trials required");
  AuditReport rep;
  rep.seed = seed;
  rep.trials = trials;
  const Measure q = minimal_entropy_measure(tree, make_exponential(1.0)).measure;

  for (double e : {0.25, 0.5, 0.75}) rep.moments.push_back({e, 0.0, 0});
  std::mt19937_64 rng(seed);
  for (std::size_t t = 0; t < trials; ++t) {
    AdaptedProcess z = random_supermartingale(tree, q, rng);
    for (auto& m : rep.moments) {
      SupMoment s = sup_moment_bound(tree, q, z, m.q);
      if (s.lhs > s.rhs * (1.0 + 1e-12)) ++m.violations;
      if (s.rhs > 0.0) m.worst_ratio = std::max(m.worst_ratio, s.lhs / s.rhs);
    }
  }

  const std::vector<double> ygrid = log_grid(-6.0, 6.0, 1001);
  for (const auto& [name, u] : families_r) {
    rep.conjugate_sandwich.push_back({name, conjugate_sandwich_audit(u, ygrid)});
  }
  const std::vector<double> xgrid = default_grid_rplus();
  for (const auto& [name, u] : families_rplus) {
    rep.power_sandwich.push_back({name, power_sandwich_audit(u, xgrid)});
  }
  return rep;
}

}  // namespace stablab
