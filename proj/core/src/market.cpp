#include "stablab/market.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "stablab/errors.hpp"

namespace stablab {

LatticeSpec LatticeSpec::binomial(double s0, double up, double down, double q,
                                  int steps) {
  if (!(up > down)) {
    throw ValidationError("lattice: up factor must exceed down factor");
  }
  return LatticeSpec{s0, {up, down}, {q, 1.0 - q}, steps};
}

ScenarioTree ScenarioTree::from_nodes(const std::vector<NodeSpec>& specs,
                                      double tol) {
  if (specs.empty()) throw ValidationError("tree: no nodes");
  if (specs[0].parent != -1) throw ValidationError("tree: node 0 must be the root");

  ScenarioTree tree;
  tree.assets_ = static_cast<int>(specs[0].price.size());
  if (tree.assets_ < 1) throw ValidationError("tree: at least one asset required");

  tree.nodes_.reserve(specs.size());
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const NodeSpec& s = specs[i];
    if (static_cast<int>(s.price.size()) != tree.assets_) {
      throw ValidationError("tree: node " + std::to_string(i) +
                            " has a price vector of the wrong length");
    }
    for (double p : s.price) {
      if (!(p > 0.0) || !std::isfinite(p)) {
        throw ValidationError("tree: non-positive price at node " + std::to_string(i));
      }
    }
    Node n{};
    n.parent = s.parent;
    n.price = s.price;
    n.leaf_index = -1;
    n.internal_index = -1;
    if (i == 0) {
      n.time = 0;
      n.prob = 1.0;
      n.path_prob = 1.0;
    } else {
      if (s.parent < 0 || static_cast<std::size_t>(s.parent) >= i) {
        throw ValidationError("tree: node " + std::to_string(i) +
                              " must reference an earlier parent");
      }
      if (!(s.prob > 0.0 && s.prob < 1.0)) {
        throw ValidationError("tree: transition probability outside (0,1) at node " +
                              std::to_string(i));
      }
      Node& parent = tree.nodes_[static_cast<std::size_t>(s.parent)];
      n.time = parent.time + 1;
      n.prob = s.prob;
      n.path_prob = parent.path_prob * s.prob;
      parent.children.push_back(static_cast<int>(i));
    }
    tree.nodes_.push_back(std::move(n));
  }

  int horizon = -1;
  for (std::size_t i = 0; i < tree.nodes_.size(); ++i) {
    const Node& n = tree.nodes_[i];
    if (n.children.empty()) {
      if (horizon == -1) horizon = n.time;
      if (n.time != horizon) {
        throw ValidationError("tree: all leaves must sit at the same time");
      }
    }
  }
  if (horizon < 1) throw ValidationError("tree: horizon must be at least 1");
  tree.horizon_ = horizon;

  for (std::size_t i = 0; i < tree.nodes_.size(); ++i) {
    Node& n = tree.nodes_[i];
    if (n.children.empty()) {
      n.leaf_index = static_cast<int>(tree.leaves_.size());
      tree.leaves_.push_back(static_cast<int>(i));
      tree.physical_.push_back(n.path_prob);
      continue;
    }
    if (n.children.size() < 2) {
      throw ValidationError("tree: node " + std::to_string(i) +
                            " has a single child (degenerate step)");
    }
    double sum = 0.0;
    for (int c : n.children) sum += tree.nodes_[static_cast<std::size_t>(c)].prob;
    if (std::abs(sum - 1.0) > tol) {
      throw ValidationError("tree: child probabilities of node " + std::to_string(i) +
                            " sum to " + std::to_string(sum));
    }
    n.internal_index = static_cast<int>(tree.internal_.size());
    tree.internal_.push_back(static_cast<int>(i));
  }
  for (double w : tree.physical_) {
    if (!(w > 0.0)) throw ValidationError("tree: zero path probability");
  }
  return tree;
}

ScenarioTree ScenarioTree::from_lattice(const LatticeSpec& lat, double tol) {
  if (!(lat.s0 > 0.0)) throw ValidationError("lattice: s0 must be positive");
  if (lat.steps < 1) throw ValidationError("lattice: steps must be >= 1");
  if (lat.factors.size() < 2 || lat.factors.size() != lat.probs.size()) {
    throw ValidationError("lattice: need >= 2 branches with matching probabilities");
  }
  for (std::size_t j = 0; j < lat.factors.size(); ++j) {
    if (!(lat.factors[j] > 0.0)) throw ValidationError("lattice: factors must be positive");
    if (!(lat.probs[j] > 0.0 && lat.probs[j] < 1.0)) {
      throw ValidationError("lattice: branch probability outside (0,1)");
    }
    for (std::size_t k = 0; k < j; ++k) {
      if (lat.factors[k] <= lat.factors[j]) {
        throw ValidationError("lattice: factors must be strictly decreasing (u > d)");
      }
    }
  }

  std::vector<NodeSpec> specs;
  specs.push_back({-1, 1.0, {lat.s0}});
  std::size_t level_begin = 0;
  std::size_t level_end = 1;
  for (int step = 0; step < lat.steps; ++step) {
    for (std::size_t i = level_begin; i < level_end; ++i) {
      double s = specs[i].price[0];
      for (std::size_t j = 0; j < lat.factors.size(); ++j) {
        specs.push_back({static_cast<int>(i), lat.probs[j], {s * lat.factors[j]}});
      }
    }
    level_begin = level_end;
    level_end = specs.size();
  }
  return from_nodes(specs, tol);
}

std::vector<int> ScenarioTree::nodes_at(int t) const {
  std::vector<int> out;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].time == t) out.push_back(static_cast<int>(i));
  }
  return out;
}

double ScenarioTree::price_increment(int child, int asset) const {
  const Node& c = node(child);
  return c.price[static_cast<std::size_t>(asset)] -
         node(c.parent).price[static_cast<std::size_t>(asset)];
}

double ScenarioTree::return_increment(int child, int asset) const {
  const Node& c = node(child);
  double prev = node(c.parent).price[static_cast<std::size_t>(asset)];
  return (c.price[static_cast<std::size_t>(asset)] - prev) / prev;
}

std::vector<int> ScenarioTree::path_to(int n) const {
  std::vector<int> path;
  for (int i = n; i >= 0; i = node(i).parent) path.push_back(i);
  std::reverse(path.begin(), path.end());
  return path;
}

bool Measure::equivalent(double tol) const {
  return std::all_of(weights.begin(), weights.end(), [tol](double w) { return w > tol; });
}

Measure physical_measure(const ScenarioTree& tree) {
  return Measure{tree.physical_weights()};
}

void validate_measure(const ScenarioTree& tree, const Measure& m, double tol) {
  if (m.weights.size() != tree.leaf_count()) {
    throw ValidationError("measure: weight count does not match leaf count");
  }
  double sum = 0.0;
  for (double w : m.weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw ValidationError("measure: negative or non-finite weight");
    }
    sum += w;
  }
  if (std::abs(sum - 1.0) > tol) {
    throw ValidationError("measure: weights sum to " + std::to_string(sum));
  }
}

std::vector<double> node_mass(const ScenarioTree& tree, const Measure& m) {
  if (m.weights.size() != tree.leaf_count()) {
    throw ValidationError("measure: weight count does not match leaf count");
  }
  std::vector<double> mass(tree.size(), 0.0);
  for (std::size_t k = 0; k < tree.leaf_count(); ++k) {
    mass[static_cast<std::size_t>(tree.leaves()[k])] = m.weights[k];
  }
  for (int i = static_cast<int>(tree.size()) - 1; i > 0; --i) {
    mass[static_cast<std::size_t>(tree.node(i).parent)] += mass[static_cast<std::size_t>(i)];
  }
  return mass;
}

std::vector<double> conditional_child_probs(const ScenarioTree& tree,
                                            const std::vector<double>& mass,
                                            int node) {
  const auto& children = tree.node(node).children;
  std::vector<double> out(children.size());
  double total = mass[static_cast<std::size_t>(node)];
  for (std::size_t j = 0; j < children.size(); ++j) {
    out[j] = total > 0.0 ? mass[static_cast<std::size_t>(children[j])] / total
                         : 1.0 / static_cast<double>(children.size());
  }
  return out;
}

Strategy Strategy::zeros(const ScenarioTree& tree, StrategyMode mode) {
  return Strategy{mode, tree.assets(),
                  std::vector<double>(tree.size() * static_cast<std::size_t>(tree.assets()), 0.0)};
}

std::vector<double> AdaptedProcess::terminal(const ScenarioTree& tree) const {
  std::vector<double> out;
  out.reserve(tree.leaf_count());
  for (int leaf : tree.leaves()) out.push_back(values[static_cast<std::size_t>(leaf)]);
  return out;
}

namespace {

void check_shape(const ScenarioTree& tree, const Strategy& s) {
  if (s.assets != tree.assets() ||
      s.values.size() != tree.size() * static_cast<std::size_t>(tree.assets())) {
    throw ValidationError("strategy: shape does not match tree");
  }
}

}  // namespace

AdaptedProcess wealth_additive(const ScenarioTree& tree, const Strategy& h,
                               double x0) {
  if (h.mode != StrategyMode::shares) {
    throw ModeMismatch("wealth_additive expects a share strategy");
  }
  check_shape(tree, h);
  AdaptedProcess x{std::vector<double>(tree.size(), x0)};
  for (std::size_t i = 1; i < tree.size(); ++i) {
    int parent = tree.node(static_cast<int>(i)).parent;
    auto pos = h.at(parent);
    double gain = 0.0;
    for (int a = 0; a < tree.assets(); ++a) {
      gain += pos[static_cast<std::size_t>(a)] * tree.price_increment(static_cast<int>(i), a);
    }
    x.values[i] = x.values[static_cast<std::size_t>(parent)] + gain;
  }
  return x;
}

AdaptedProcess wealth_multiplicative(const ScenarioTree& tree, const Strategy& pi,
                                     double x0) {
  if (pi.mode != StrategyMode::fractions) {
    throw ModeMismatch("wealth_multiplicative expects a fraction strategy");
  }
  check_shape(tree, pi);
  if (!(x0 > 0.0)) throw AdmissibilityViolation("initial wealth must be positive");
  AdaptedProcess x{std::vector<double>(tree.size(), x0)};
  for (std::size_t i = 1; i < tree.size(); ++i) {
    int parent = tree.node(static_cast<int>(i)).parent;
    auto frac = pi.at(parent);
    double growth = 1.0;
    for (int a = 0; a < tree.assets(); ++a) {
      growth += frac[static_cast<std::size_t>(a)] * tree.return_increment(static_cast<int>(i), a);
    }
    x.values[i] = x.values[static_cast<std::size_t>(parent)] * growth;
    if (!(x.values[i] > 0.0)) {
      throw AdmissibilityViolation("wealth is non-positive at node " + std::to_string(i));
    }
  }
  return x;
}

AdaptedProcess martingale_closure(const ScenarioTree& tree, const Measure& m,
                                  std::span<const double> terminal) {
  if (terminal.size() != tree.leaf_count()) {
    throw ValidationError("conditional_expectation: terminal values do not match leaves");
  }
  std::vector<double> mass = node_mass(tree, m);
  AdaptedProcess out{std::vector<double>(tree.size(), 0.0)};
  for (std::size_t k = 0; k < tree.leaf_count(); ++k) {
    out.values[static_cast<std::size_t>(tree.leaves()[k])] = terminal[k];
  }
  for (int i = static_cast<int>(tree.size()) - 1; i >= 0; --i) {
    const auto& node = tree.node(i);
    if (node.children.empty()) continue;
    auto probs = conditional_child_probs(tree, mass, i);
    double v = 0.0;
    for (std::size_t j = 0; j < node.children.size(); ++j) {
      v += probs[j] * out.values[static_cast<std::size_t>(node.children[j])];
    }
    out.values[static_cast<std::size_t>(i)] = v;
  }
  return out;
}

std::vector<double> conditional_expectation(const ScenarioTree& tree,
                                            const Measure& m,
                                            std::span<const double> terminal,
                                            int t) {
  if (t < 0 || t > tree.horizon()) {
    throw ValidationError("conditional_expectation: time outside [0, T]");
  }
  AdaptedProcess full = martingale_closure(tree, m, terminal);
  std::vector<double> out;
  for (int n : tree.nodes_at(t)) out.push_back(full[n]);
  return out;
}

double martingale_residual(const ScenarioTree& tree, const Measure& m) {
  std::vector<double> mass = node_mass(tree, m);
  double worst = 0.0;
  for (int n : tree.internal_nodes()) {
    if (!(mass[static_cast<std::size_t>(n)] > 0.0)) continue;
    auto probs = conditional_child_probs(tree, mass, n);
    const auto& children = tree.node(n).children;
    for (int a = 0; a < tree.assets(); ++a) {
      double drift = 0.0;
      for (std::size_t j = 0; j < children.size(); ++j) {
        drift += probs[j] * tree.price_increment(children[j], a);
      }
      worst = std::max(worst, std::abs(drift));
    }
  }
  return worst;
}

double bracket_distance(const ScenarioTree& tree, const Measure& m,
                        const Strategy& a, const Strategy& b) {
  if (a.mode != b.mode) throw ModeMismatch("bracket_distance: strategy modes differ");
  check_shape(tree, a);
  check_shape(tree, b);
  const bool returns = a.mode == StrategyMode::fractions;
  std::vector<double> mass = node_mass(tree, m);
  const auto d = static_cast<std::size_t>(tree.assets());
  std::vector<double> diff(d);
  std::vector<double> mean(d);
  double total = 0.0;
  for (int n : tree.internal_nodes()) {
    double w = mass[static_cast<std::size_t>(n)];
    if (!(w > 0.0)) continue;
    auto pa = a.at(n);
    auto pb = b.at(n);
    for (std::size_t i = 0; i < d; ++i) diff[i] = pa[i] - pb[i];
    auto probs = conditional_child_probs(tree, mass, n);
    const auto& children = tree.node(n).children;
    auto inc = [&](int child, std::size_t i) {
      return returns ? tree.return_increment(child, static_cast<int>(i))
                     : tree.price_increment(child, static_cast<int>(i));
    };
    std::fill(mean.begin(), mean.end(), 0.0);
    for (std::size_t j = 0; j < children.size(); ++j) {
      for (std::size_t i = 0; i < d; ++i) mean[i] += probs[j] * inc(children[j], i);
    }
    double var = 0.0;
    for (std::size_t j = 0; j < children.size(); ++j) {
      double proj = 0.0;
      for (std::size_t i = 0; i < d; ++i) proj += (inc(children[j], i) - mean[i]) * diff[i];
      var += probs[j] * proj * proj;
    }
    total += w * var;
  }
  return total;
}

std::vector<std::vector<double>> one_step_vertices(const ScenarioTree& tree, int node) {
  const auto& children = tree.node(node).children;
  const int k = static_cast<int>(children.size());
  const int d = tree.assets();
  std::vector<std::vector<double>> out;
  // Enumerate supports of size 1..d+1 (basic feasible solutions).
  std::vector<int> subset;
  auto try_subset = [&]() {
    const int s = static_cast<int>(subset.size());
    Eigen::MatrixXd a(d + 1, s);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(d + 1);
    rhs(d) = 1.0;
    for (int c = 0; c < s; ++c) {
      for (int i = 0; i < d; ++i) a(i, c) = tree.price_increment(children[static_cast<std::size_t>(subset[static_cast<std::size_t>(c)])], i);
      a(d, c) = 1.0;
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    qr.setThreshold(1e-12);
    if (qr.rank() != s) return;
    Eigen::VectorXd w = qr.solve(rhs);
    if ((a * w - rhs).cwiseAbs().maxCoeff() > 1e-10) return;
    if (w.minCoeff() <= 1e-14) return;
    std::vector<double> full(static_cast<std::size_t>(k), 0.0);
    for (int c = 0; c < s; ++c) full[static_cast<std::size_t>(subset[static_cast<std::size_t>(c)])] = w(c);
    out.push_back(std::move(full));
  };
  // Iterative combination enumeration.
  for (int size = 1; size <= std::min(k, d + 1); ++size) {
    subset.assign(static_cast<std::size_t>(size), 0);
    std::iota(subset.begin(), subset.end(), 0);
    while (true) {
      try_subset();
      int i = size - 1;
      while (i >= 0 && subset[static_cast<std::size_t>(i)] == k - size + i) --i;
      if (i < 0) break;
      ++subset[static_cast<std::size_t>(i)];
      for (int j = i + 1; j < size; ++j) subset[static_cast<std::size_t>(j)] = subset[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
  return out;
}

namespace {

/// Leaf weights from per-node conditional child probabilities.
Measure compose(const ScenarioTree& tree,
                const std::vector<std::vector<double>>& cond_by_internal) {
  std::vector<double> reach(tree.size(), 0.0);
  reach[0] = 1.0;
  for (std::size_t i = 0; i < tree.size(); ++i) {
    const auto& n = tree.node(static_cast<int>(i));
    if (n.children.empty()) continue;
    const auto& cond = cond_by_internal[static_cast<std::size_t>(n.internal_index)];
    for (std::size_t j = 0; j < n.children.size(); ++j) {
      reach[static_cast<std::size_t>(n.children[j])] = reach[i] * cond[j];
    }
  }
  Measure m;
  for (int leaf : tree.leaves()) m.weights.push_back(reach[static_cast<std::size_t>(leaf)]);
  return m;
}

std::vector<std::vector<std::vector<double>>> all_vertices(const ScenarioTree& tree) {
  std::vector<std::vector<std::vector<double>>> verts;
  for (int n : tree.internal_nodes()) {
    auto v = one_step_vertices(tree, n);
    if (v.empty()) {
      throw NoMartingaleMeasure("no one-step martingale measure at node " + std::to_string(n));
    }
    verts.push_back(std::move(v));
  }
  return verts;
}

}  // namespace

std::vector<Measure> martingale_vertices(const ScenarioTree& tree,
                                         std::size_t max_count,
                                         std::uint64_t seed) {
  auto verts = all_vertices(tree);
  // Total count of products, saturating.
  double total = 1.0;
  for (const auto& v : verts) total *= static_cast<double>(v.size());

  std::vector<Measure> out;
  std::vector<std::vector<double>> choice(verts.size());
  if (total <= static_cast<double>(max_count)) {
    std::vector<std::size_t> idx(verts.size(), 0);
    while (true) {
      for (std::size_t i = 0; i < verts.size(); ++i) choice[i] = verts[i][idx[i]];
      out.push_back(compose(tree, choice));
      std::size_t i = 0;
      while (i < idx.size() && ++idx[i] == verts[i].size()) idx[i++] = 0;
      if (i == idx.size()) break;
    }
    return out;
  }
  std::mt19937_64 rng(seed);
  for (std::size_t c = 0; c < max_count; ++c) {
    for (std::size_t i = 0; i < verts.size(); ++i) {
      std::uniform_int_distribution<std::size_t> pick(0, verts[i].size() - 1);
      choice[i] = verts[i][pick(rng)];
    }
    out.push_back(compose(tree, choice));
  }
  return out;
}

std::vector<Measure> random_martingale_measures(const ScenarioTree& tree,
                                                std::size_t count,
                                                std::uint64_t seed) {
  auto verts = all_vertices(tree);
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> expo(1.0);
  std::vector<Measure> out;
  std::vector<std::vector<double>> choice(verts.size());
  for (std::size_t c = 0; c < count; ++c) {
    for (std::size_t i = 0; i < verts.size(); ++i) {
      const auto& vs = verts[i];
      std::vector<double> mix(vs.front().size(), 0.0);
      double norm = 0.0;
      std::vector<double> lambda(vs.size());
      for (auto& l : lambda) {
        l = expo(rng) + 1e-3;
        norm += l;
      }
      for (std::size_t v = 0; v < vs.size(); ++v) {
        for (std::size_t j = 0; j < mix.size(); ++j) mix[j] += lambda[v] / norm * vs[v][j];
      }
      choice[i] = std::move(mix);
    }
    out.push_back(compose(tree, choice));
  }
  return out;
}

}  // namespace stablab

namespace stablab {

bool admits_equivalent_martingale_measure(const ScenarioTree& tree) {
  for (int n : tree.internal_nodes()) {
    auto verts = one_step_vertices(tree, n);
    std::vector<bool> covered(tree.node(n).children.size(), false);
    for (const auto& v : verts) {
      for (std::size_t j = 0; j < v.size(); ++j) covered[j] = covered[j] || v[j] > 0.0;
    }
    if (verts.empty() || !std::all_of(covered.begin(), covered.end(), [](bool b) { return b; })) {
      return false;
    }
  }
  return true;
}

void require_spanning_increments(const ScenarioTree& tree) {
  const int d = tree.assets();
  for (int n : tree.internal_nodes()) {
    const auto& children = tree.node(n).children;
    Eigen::MatrixXd inc(static_cast<Eigen::Index>(children.size()), d);
    for (std::size_t j = 0; j < children.size(); ++j) {
      for (int i = 0; i < d; ++i) inc(static_cast<Eigen::Index>(j), i) = tree.price_increment(children[j], i);
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(inc);
    qr.setThreshold(1e-12);
    if (qr.rank() < d) {
      throw ValidationError("tree: price increments at node " + std::to_string(n) +
                            " do not span all assets");
    }
  }
}

}  // namespace stablab
