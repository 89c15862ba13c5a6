#include "stablab/tree_io.hpp"

#include <fstream>
#include <sstream>

#include "json_detail.hpp"
#include "stablab/errors.hpp"

namespace stablab {

namespace detail {

namespace {

std::vector<double> price_vector(const nlohmann::json& p) {
  if (p.is_number()) return {p.get<double>()};
  if (p.is_array()) return p.get<std::vector<double>>();
  throw ValidationError("tree: \"price\" must be a number or an array");
}

}  // namespace

ScenarioTree tree_from_json(const nlohmann::json& j) {
  try {
    if (j.contains("lattice")) {
      const auto& l = j.at("lattice");
      double s0 = l.value("s0", 1.0);
      int steps = l.at("steps").get<int>();
      if (l.contains("factors")) {
        LatticeSpec spec{s0, l.at("factors").get<std::vector<double>>(),
                         l.at("probs").get<std::vector<double>>(), steps};
        return ScenarioTree::from_lattice(spec);
      }
      double q = l.at("q").get<double>();
      if (!(q > 0.0 && q < 1.0)) throw ValidationError("lattice: q outside (0,1)");
      return ScenarioTree::from_lattice(LatticeSpec::binomial(
          s0, l.at("u").get<double>(), l.at("d").get<double>(), q, steps));
    }
    if (j.contains("nodes")) {
      std::vector<NodeSpec> specs;
      for (const auto& n : j.at("nodes")) {
        NodeSpec s;
        s.parent = (!n.contains("parent") || n.at("parent").is_null())
                       ? -1
                       : n.at("parent").get<int>();
        s.prob = n.value("prob", 1.0);
        s.price = price_vector(n.at("price"));
        specs.push_back(std::move(s));
      }
      return ScenarioTree::from_nodes(specs);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("tree: ") + e.what());
  }
  throw ValidationError("tree: expected a \"lattice\" or \"nodes\" member");
}

}  // namespace detail

ScenarioTree parse_tree(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("tree: malformed JSON: ") + e.what());
  }
  return detail::tree_from_json(j);
}

ScenarioTree load_tree(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("tree: cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_tree(ss.str());
}

}  // namespace stablab
