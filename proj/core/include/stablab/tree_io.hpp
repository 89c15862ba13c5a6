#pragma once

#include <filesystem>
#include <string>

#include "stablab/market.hpp"

namespace stablab {

/// Parses a tree specification document. Two shapes are accepted:
///
///   {"lattice": {"s0": 1, "u": 2, "d": 0.5, "q": 0.5, "steps": 2}}
///   {"lattice": {"s0": 1, "factors": [1.5, 1, 0.5], "probs": [0.3, 0.4, 0.3], "steps": 2}}
///   {"nodes": [{"parent": null, "price": [1.0]},
///              {"parent": 0, "prob": 0.5, "price": [2.0]}, ...]}
///
/// In the node form, nodes must list parents before children; "price" may be
/// a number (single asset) or an array; the root's "prob" is ignored.
ScenarioTree parse_tree(const std::string& json_text);

ScenarioTree load_tree(const std::filesystem::path& path);

}  // namespace stablab
