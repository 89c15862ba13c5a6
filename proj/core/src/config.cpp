#include "stablab/config.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json_detail.hpp"
#include "stablab/errors.hpp"
#include "stablab/tree_io.hpp"

namespace stablab {

namespace {

using nlohmann::json;

const std::vector<std::string> kRealKinds = {"exponential", "sine", "constant_shift"};
const std::vector<std::string> kPositiveKinds = {"power", "log_sine"};

bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

FamilySpec parse_family(const json& j) {
  FamilySpec f;
  f.kind = j.at("kind").get<std::string>();
  if (!contains(kRealKinds, f.kind) && !contains(kPositiveKinds, f.kind)) {
    throw ValidationError("config: unknown family kind \"" + f.kind + "\"");
  }
  f.a = j.value("a", 0.0);
  f.omega = j.value("omega", 1.0);
  f.alpha = j.value("alpha", 1.0);
  // The pure exponential family defaults to alpha_delta = 1 + delta.
  f.alpha_slope = j.value("alpha_slope", f.kind == "exponential" ? 1.0 : 0.0);
  if (j.contains("anchor") && !j.at("anchor").is_null()) f.anchor = j.at("anchor").get<double>();
  f.p0 = j.value("p0", -1.0);
  if (!(f.alpha > 0.0)) throw ValidationError("config: family alpha must be positive");
  if (!(f.p0 < 0.0)) throw ValidationError("config: family p0 must be negative");
  return f;
}

std::vector<double> parse_claim(const json& j, const ScenarioTree& tree) {
  std::vector<double> b(tree.leaf_count(), 0.0);
  if (j.is_null()) return b;
  if (j.is_array()) {
    b = j.get<std::vector<double>>();
    if (b.size() != tree.leaf_count()) throw ValidationError("config: claim needs one value per leaf");
    return b;
  }
  std::string type = j.at("type").get<std::string>();
  int asset = j.value("asset", 0);
  if (asset < 0 || asset >= tree.assets()) throw ValidationError("config: claim asset out of range");
  for (int leaf : tree.leaves()) {
    double s = tree.node(leaf).price[static_cast<std::size_t>(asset)];
    double& out = b[static_cast<std::size_t>(tree.node(leaf).leaf_index)];
    if (type == "call") {
      out = std::max(s - j.at("strike").get<double>(), 0.0);
    } else if (type == "put") {
      out = std::max(j.at("strike").get<double>() - s, 0.0);
    } else if (type == "constant") {
      out = j.at("value").get<double>();
    } else if (type == "zero") {
      out = 0.0;
    } else {
      throw ValidationError("config: unknown claim type \"" + type + "\"");
    }
  }
  return b;
}

ScenarioTree parse_market(const json& j, const std::string& base_dir) {
  if (j.contains("file")) {
    std::filesystem::path p(j.at("file").get<std::string>());
    if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
    return load_tree(p.string());
  }
  return detail::tree_from_json(j);
}

}  // namespace

bool FamilySpec::on_real_line() const { return contains(kRealKinds, kind); }

UtilityOnR family_member_r(const FamilySpec& f, double delta) {
  if (!f.on_real_line()) throw ValidationError("family \"" + f.kind + "\" is not defined on the real line");
  if (!(delta >= 0.0)) throw ValidationError("family: delta must be non-negative");
  double alpha = f.alpha + f.alpha_slope * delta;
  if (f.kind == "exponential") return make_exponential(alpha);
  RatioSpec ratio{f.kind == "sine" ? RatioKind::sine : RatioKind::constant_shift, f.a, f.omega};
  FamilyOptions opts;
  opts.anchor = f.anchor;
  return make_perturbed_exponential(delta, alpha, ratio, opts);
}

UtilityOnRPlus family_member_rplus(const FamilySpec& f, double p) {
  if (f.on_real_line()) throw ValidationError("family \"" + f.kind + "\" is not defined on the positive line");
  if (f.kind == "power") return make_power(p);
  UtilityOnRPlus base = make_log_sine_power(f.p0, f.a, f.omega, f.anchor);
  return make_power_family_member(base, p, inverse_linear_mix(f.p0));
}

SweepSpec parse_spec(const std::string& text, const std::string& name, const std::string& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config: malformed JSON: ") + e.what());
  }
  SweepSpec s;
  s.name = name;
  s.source = text;
  try {
    if (!j.is_object()) throw ValidationError("config: top level must be an object");
    s.tree = parse_market(j.at("market"), base_dir);
    s.family = parse_family(j.at("family"));
    s.grid = j.at("grid").get<std::vector<double>>();
    s.claim = parse_claim(j.value("claim", json()), s.tree);
    s.x0 = j.value("x0", s.family.on_real_line() ? 0.0 : 1.0);
    s.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("tolerances")) {
      const json& t = j.at("tolerances");
      s.gradient_tol = t.value("gradient", s.gradient_tol);
      s.indifference_tol = t.value("indifference", s.indifference_tol);
    }
    s.functionals = j.value("functionals", std::vector<std::string>{});
    if (j.contains("outputs")) {
      s.csv_name = j.at("outputs").value("csv", "");
      s.json_name = j.at("outputs").value("json", "");
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  if (s.csv_name.empty()) s.csv_name = name + ".csv";
  if (s.json_name.empty()) s.json_name = name + ".json";

  if (s.grid.empty()) throw ValidationError("config: empty grid");
  for (std::size_t i = 1; i < s.grid.size(); ++i) {
    if (!(s.grid[i] < s.grid[i - 1])) throw ValidationError("config: grid must be strictly decreasing");
  }
  for (double v : s.grid) {
    if (!std::isfinite(v)) throw ValidationError("config: non-finite grid value");
    if (s.family.on_real_line() && v < 0.0) throw ValidationError("config: delta grid must be >= 0");
    if (!s.family.on_real_line() && !(v < 0.0)) throw ValidationError("config: p grid must be < 0");
    if (!s.family.on_real_line() && v > s.family.p0) {
      throw ValidationError("config: p grid must not exceed the family p0");
    }
  }
  for (double b : s.claim) {
    if (!std::isfinite(b)) throw ValidationError("config: non-finite claim");
  }
  if (!s.family.on_real_line() && !(s.x0 > 0.0)) throw ValidationError("config: x0 must be positive");
  if (!(s.gradient_tol > 0.0) || !(s.indifference_tol > 0.0)) {
    throw ValidationError("config: tolerances must be positive");
  }
  // Every member along the grid must be constructible.
  for (double v : s.grid) {
    if (s.family.on_real_line()) {
      (void)family_member_r(s.family, v);
    } else {
      (void)family_member_rplus(s.family, v);
    }
  }
  return s;
}

SweepSpec load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config: cannot open \"" + path + "\"");
  std::stringstream ss;
  ss << in.rdbuf();
  std::filesystem::path p(path);
  return parse_spec(ss.str(), p.stem().string(), p.parent_path().empty() ? "." : p.parent_path().string());
}

}  // namespace stablab
