#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "stablab/market.hpp"

namespace stablab::fixtures {

inline ScenarioTree binomial(int steps) {
  return ScenarioTree::from_lattice(LatticeSpec::binomial(1.0, 2.0, 0.5, 0.5, steps));
}

/// One step, dS in {1, 0, -0.5}, uniform P.
inline ScenarioTree trinomial_one_step() {
  return ScenarioTree::from_nodes({{-1, 1.0, {1.0}}, {0, 1.0 / 3, {2.0}}, {0, 1.0 / 3, {1.0}}, {0, 1.0 / 3, {0.5}}});
}

/// Two steps with 2 or 3 branches per node and random prices / probabilities.
/// Every one-step market has moves both up and down, so an equivalent
/// martingale measure exists.
inline ScenarioTree random_tree(std::mt19937_64& rng, int steps = 2) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<NodeSpec> nodes = {{-1, 1.0, {1.0}}};
  std::vector<int> frontier = {0};
  for (int t = 0; t < steps; ++t) {
    std::vector<int> next;
    for (int parent : frontier) {
      int k = unit(rng) < 0.5 ? 2 : 3;
      std::vector<double> w(static_cast<std::size_t>(k));
      double total = 0.0;
      for (double& x : w) total += (x = 0.2 + unit(rng));
      double s = nodes[static_cast<std::size_t>(parent)].price[0];
      for (int c = 0; c < k; ++c) {
        double factor;
        if (c == 0) {
          factor = 1.05 + 0.6 * unit(rng);
        } else if (c == k - 1) {
          factor = 0.95 - 0.45 * unit(rng);
        } else {
          factor = 0.8 + 0.4 * unit(rng);
        }
        nodes.push_back({parent, w[static_cast<std::size_t>(c)] / total, {s * factor}});
        next.push_back(static_cast<int>(nodes.size()) - 1);
      }
    }
    frontier = next;
  }
  return ScenarioTree::from_nodes(nodes, 1e-9);
}

inline std::vector<double> call_payoff(const ScenarioTree& tree, double strike) {
  std::vector<double> b(tree.leaf_count());
  for (int leaf : tree.leaves()) {
    b[static_cast<std::size_t>(tree.node(leaf).leaf_index)] = std::max(tree.node(leaf).price[0] - strike, 0.0);
  }
  return b;
}

}  // namespace stablab::fixtures
