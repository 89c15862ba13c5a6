#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace stablab {

/// Default tolerance for probability sums and "== 0 / == 1" checks.
inline constexpr double kProbTol = 1e-12;

/// One node of the input description of a tree.
struct NodeSpec {
  int parent = -1;             ///< -1 for the root
  double prob = 1.0;           ///< transition probability from the parent
  std::vector<double> price;   ///< discounted asset prices at this node
};

/// Recombining multiplicative lattice description. Expanded into a full
/// event tree. With two factors (up, down) this is the binomial lattice with
/// branch probability q; `factors`/`probs` generalise it to k branches.
struct LatticeSpec {
  double s0 = 1.0;
  std::vector<double> factors;  ///< one multiplicative factor per branch
  std::vector<double> probs;    ///< one probability per branch
  int steps = 1;

  static LatticeSpec binomial(double s0, double up, double down, double q,
                              int steps);
};

/// Finite filtered probability space with an adapted price process.
/// Nodes are stored parent-before-child; leaves are the nodes at time
/// `horizon()` and are indexed 0..leaf_count()-1 in node order.
class ScenarioTree {
 public:
  struct Node {
    int parent;
    int time;
    double prob;                ///< one-step probability from parent
    double path_prob;           ///< P(root -> node)
    std::vector<double> price;
    std::vector<int> children;
    int leaf_index;             ///< -1 for non-terminal nodes
    int internal_index;         ///< -1 for leaves
  };

  static ScenarioTree from_nodes(const std::vector<NodeSpec>& nodes,
                                 double tol = kProbTol);
  static ScenarioTree from_lattice(const LatticeSpec& lattice,
                                   double tol = kProbTol);

  std::size_t size() const { return nodes_.size(); }
  int horizon() const { return horizon_; }
  int assets() const { return assets_; }
  const Node& node(int i) const { return nodes_[static_cast<std::size_t>(i)]; }

  std::span<const int> leaves() const { return leaves_; }
  std::span<const int> internal_nodes() const { return internal_; }
  std::size_t leaf_count() const { return leaves_.size(); }
  std::size_t internal_count() const { return internal_.size(); }
  std::vector<int> nodes_at(int t) const;

  /// Path probabilities of the leaves under P.
  const std::vector<double>& physical_weights() const { return physical_; }

  /// Price increment S(child) - S(parent) for asset i.
  double price_increment(int child, int asset) const;
  /// Return increment (S(child) - S(parent)) / S(parent) for asset i.
  double return_increment(int child, int asset) const;

  /// Nodes from the root to `node`, root first.
  std::vector<int> path_to(int node) const;

 private:
  std::vector<Node> nodes_;
  std::vector<int> leaves_;
  std::vector<int> internal_;
  std::vector<double> physical_;
  int horizon_ = 0;
  int assets_ = 0;
};

/// Probability measure on the leaves of a tree.
struct Measure {
  std::vector<double> weights;

  bool equivalent(double tol = kProbTol) const;
};

/// The physical measure P as a Measure.
Measure physical_measure(const ScenarioTree& tree);

/// Validates weights >= 0 and sum 1 for `tree`.
void validate_measure(const ScenarioTree& tree, const Measure& m,
                      double tol = kProbTol);

/// Mass of every node under m (sum of descendant leaf weights).
std::vector<double> node_mass(const ScenarioTree& tree, const Measure& m);

enum class StrategyMode { shares, fractions };

/// A predictable integrand: one vector per node, used on the step leaving
/// that node. Shares integrate price increments; fractions (and monetary
/// amounts) integrate return increments. Leaf rows are ignored.
struct Strategy {
  StrategyMode mode = StrategyMode::shares;
  int assets = 1;
  std::vector<double> values;  ///< node-major, size nodes * assets

  static Strategy zeros(const ScenarioTree& tree, StrategyMode mode);

  std::span<const double> at(int node) const {
    return {values.data() + static_cast<std::size_t>(node) * assets,
            static_cast<std::size_t>(assets)};
  }
  std::span<double> at(int node) {
    return {values.data() + static_cast<std::size_t>(node) * assets,
            static_cast<std::size_t>(assets)};
  }
};

/// One real value per node.
struct AdaptedProcess {
  std::vector<double> values;

  double operator[](int node) const { return values[static_cast<std::size_t>(node)]; }
  /// Values at the leaves, in leaf order.
  std::vector<double> terminal(const ScenarioTree& tree) const;
};

/// X_t = x0 + sum_{s<=t} H_{s-1} . dS_s.
AdaptedProcess wealth_additive(const ScenarioTree& tree, const Strategy& shares,
                               double x0);

/// X_t = X_{t-1} (1 + pi_{t-1} . dR_t). Throws AdmissibilityViolation if any
/// node wealth is <= 0.
AdaptedProcess wealth_multiplicative(const ScenarioTree& tree,
                                     const Strategy& fractions, double x0);

/// E_m[x | F_t] for every node (the m-martingale closing x). Nodes with zero
/// mass under m get the unweighted average of their children.
AdaptedProcess martingale_closure(const ScenarioTree& tree, const Measure& m,
                                  std::span<const double> terminal);

/// E_m[x | F_t] for the nodes at time t, in tree.nodes_at(t) order.
std::vector<double> conditional_expectation(const ScenarioTree& tree,
                                            const Measure& m,
                                            std::span<const double> terminal,
                                            int t);

/// Conditional probabilities of the children of `node` under m.
std::vector<double> conditional_child_probs(const ScenarioTree& tree,
                                            const std::vector<double>& mass,
                                            int node);

/// max over reachable nodes and assets of |E_m[dS | node]|.
double martingale_residual(const ScenarioTree& tree, const Measure& m);

/// sum_t E_m[(A-B)^T Cov_m(dY | node) (A-B)] where dY is the price increment
/// for share strategies and the return increment for fraction strategies.
double bracket_distance(const ScenarioTree& tree, const Measure& m,
                        const Strategy& a, const Strategy& b);

/// One-step martingale measures at `node` that are extreme points of
/// {w >= 0, sum w = 1, sum w dS = 0}.
std::vector<std::vector<double>> one_step_vertices(const ScenarioTree& tree,
                                                   int node);

/// Extreme points of the martingale polytope M^a of the tree, built as
/// products of one-step vertices. At most `max_count` are returned; if the
/// polytope has more, a seeded random subset is drawn.
std::vector<Measure> martingale_vertices(const ScenarioTree& tree,
                                         std::size_t max_count,
                                         std::uint64_t seed);

/// Random equivalent martingale measures (random convex mixtures of
/// one-step vertices at every node).
std::vector<Measure> random_martingale_measures(const ScenarioTree& tree,
                                                std::size_t count,
                                                std::uint64_t seed);

}  // namespace stablab

namespace stablab {

/// True iff every one-step market admits a strictly positive martingale
/// weighting, i.e. M^e is non-empty.
bool admits_equivalent_martingale_measure(const ScenarioTree& tree);

/// Throws ValidationError if the increments at some node do not span R^d
/// (the optimal position would not be unique).
void require_spanning_increments(const ScenarioTree& tree);

}  // namespace stablab
