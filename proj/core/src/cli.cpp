#include "stablab/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include "stablab/audit.hpp"
#include "stablab/config.hpp"
#include "stablab/entropic.hpp"
#include "stablab/errors.hpp"
#include "stablab/harness.hpp"
#include "stablab/positive.hpp"
#include "stablab/pricing.hpp"
#include "stablab/report.hpp"

namespace stablab {

namespace {

using nlohmann::ordered_json;

struct Flags {
  std::string config;
  std::string out = ".";
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  std::optional<double> at;
  std::size_t trials = 1000;
};

std::string output_path(const Flags& f, const std::string& file) {
  return (std::filesystem::path(f.out) / file).string();
}

SweepSpec load(const Flags& f) {
  SweepSpec spec = load_spec(f.config);
  if (f.seed) spec.seed = *f.seed;
  if (f.tol) {
    if (!(*f.tol > 0.0)) throw ValidationError("--tol must be positive");
    spec.gradient_tol = *f.tol;
  }
  return spec;
}

double grid_point(const Flags& f, const SweepSpec& spec) { return f.at ? *f.at : spec.grid.front(); }

ordered_json node_rows(const ScenarioTree& tree, const Strategy& s) {
  ordered_json rows = ordered_json::array();
  for (int n : tree.internal_nodes()) {
    auto v = s.at(n);
    rows.push_back({{"node", n}, {"time", tree.node(n).time}, {"position", std::vector<double>(v.begin(), v.end())}});
  }
  return rows;
}

ordered_json header(const char* kind, const SweepSpec& spec, double at) {
  ordered_json j;
  j["schema"] = std::string("stablab.") + kind;
  j["schema_version"] = kReportSchemaVersion;
  j["config"] = spec.name;
  j["at"] = at;
  return j;
}

int cmd_solve(const Flags& f, std::ostream& out) {
  SweepSpec spec = load(f);
  const double at = grid_point(f, spec);
  ordered_json j = header("solve", spec, at);
  SolverOptions solver;
  solver.gradient_tol = spec.gradient_tol;
  if (spec.family.on_real_line()) {
    UtilityOnR u = family_member_r(spec.family, at);
    std::vector<double> xi(spec.tree.leaf_count(), spec.x0);
    PrimalSolution sol = solve_primal(spec.tree, u, xi, solver);
    DualMeasure dual = extract_dual(spec.tree, u, sol);
    OptimalityReport opt = verify_optimality(spec.tree, u, sol, dual, default_probes(spec.tree, spec.seed));
    j["value"] = sol.value;
    j["gradient_norm"] = sol.gradient_norm;
    j["iterations"] = sol.iterations;
    j["strategy"] = node_rows(spec.tree, sol.strategy);
    j["terminal_total"] = sol.total;
    j["dual_measure"] = dual.measure.weights;
    j["multiplier"] = dual.multiplier;
    j["optimality"] = {{"martingale_defect", opt.martingale_defect},
                       {"supermartingale_slack", opt.supermartingale_slack},
                       {"first_order_residual", opt.first_order_residual},
                       {"probes", opt.probe_count}};
    out << "value " << format_double(sol.value) << "  multiplier " << format_double(dual.multiplier)
        << "  first-order residual " << format_double(opt.first_order_residual) << "\n";
  } else {
    std::vector<double> weight(spec.claim.size());
    for (std::size_t k = 0; k < weight.size(); ++k) weight[k] = std::exp(spec.claim[k]);
    PositiveOptions popts;
    popts.gradient_tol = spec.gradient_tol;
    UtilityOnRPlus u = family_member_rplus(spec.family, at);
    PositiveSolution sol = solve_power_field(spec.tree, UtilityField::make(u, weight), spec.x0, popts);
    PositiveSolution pure = solve_power_field(spec.tree, UtilityField::make(make_power(at), weight), spec.x0, popts);
    OpportunityProcess opp = opportunity_process(spec.tree, at, weight, popts);
    AuxMeasure aux = auxiliary_measure(spec.tree, pure, spec.seed);
    ExponentialHedge hedge = exponential_hedge(spec.tree, spec.claim, spec.x0, solver);
    j["value"] = sol.value;
    j["multiplier"] = sol.multiplier;
    j["gradient_norm"] = sol.gradient_norm;
    j["fractions"] = node_rows(spec.tree, sol.fractions);
    j["terminal_wealth"] = sol.wealth.terminal(spec.tree);
    j["deflator"] = sol.deflator;
    j["opportunity_process"] = opp.values.values;
    j["auxiliary_measure"] = aux.measure.weights;
    j["numeraire_max"] = aux.numeraire_max;
    j["exponential_hedge"] = node_rows(spec.tree, hedge.amounts);
    j["scaled_strategy_distance"] = scaled_strategy_distance(spec.tree, sol.fractions, hedge, at, physical_measure(spec.tree));
    out << "value " << format_double(sol.value) << "  multiplier " << format_double(sol.multiplier)
        << "  L0 " << format_double(opp.values[0]) << "\n";
  }
  std::string path = output_path(f, spec.name + "_solve.json");
  write_text(path, j.dump(2) + "\n");
  out << "wrote " << path << "\n";
  return kExitOk;
}

int cmd_price(const Flags& f, std::ostream& out) {
  SweepSpec spec = load(f);
  if (!spec.family.on_real_line()) throw ValidationError("price: family must live on the real line");
  const double at = grid_point(f, spec);
  UtilityOnR u = family_member_r(spec.family, at);
  SolverOptions solver;
  solver.gradient_tol = spec.gradient_tol;
  IndifferenceOptions iopts;
  iopts.tol = spec.indifference_tol;
  iopts.solver = solver;
  PrimalSolution sol = solve_primal(spec.tree, u, std::vector<double>(spec.tree.leaf_count(), spec.x0), solver);
  PriceResult davis = davis_price(extract_dual(spec.tree, u, sol), spec.claim);
  PriceResult indiff = indifference_price(spec.tree, u, spec.x0, spec.claim, iopts);

  ordered_json j = header("price", spec, at);
  j["davis"] = {{"price", davis.price}};
  j["indifference"] = {{"price", indiff.price},
                       {"residual", indiff.residual},
                       {"bracket", {indiff.bracket_lo, indiff.bracket_hi}},
                       {"iterations", indiff.iterations}};
  out << "davis " << format_double(davis.price) << "  indifference " << format_double(indiff.price) << "\n";
  std::string path = output_path(f, spec.name + "_price.json");
  write_text(path, j.dump(2) + "\n");
  out << "wrote " << path << "\n";
  return kExitOk;
}

int cmd_sweep(const Flags& f, bool delta, std::ostream& out, std::ostream& err) {
  SweepSpec spec = load(f);
  SweepReport report = delta ? sweep_delta(spec) : sweep_p(spec);
  std::string csv = output_path(f, spec.csv_name);
  std::string js = output_path(f, spec.json_name);
  write_text(csv, to_csv(report));
  write_text(js, to_json(report));
  out << "wrote " << csv << " and " << js << " (" << report.rows.size() << " rows)\n";
  if (!report.complete) {
    err << "sweep incomplete: " << report.error << "\n";
    return kExitSolver;
  }
  return kExitOk;
}

int cmd_audit(const Flags& f, std::ostream& out) {
  ScenarioTree tree = default_audit_tree();
  auto families_r = shipped_families_r();
  auto families_rplus = shipped_families_rplus();
  if (!f.config.empty()) {
    SweepSpec spec = load(f);
    tree = spec.tree;
    for (double v : spec.grid) {
      std::string tag = spec.name + "@" + format_double(v);
      if (spec.family.on_real_line()) {
        families_r.emplace_back(tag, family_member_r(spec.family, v));
      } else {
        families_rplus.emplace_back(tag, family_member_rplus(spec.family, v));
      }
    }
  }
  const std::uint64_t seed = f.seed.value_or(0);
  AuditReport rep = audit_probabilistic_lemmas(tree, seed, f.trials, families_r, families_rplus);

  ordered_json j;
  j["schema"] = "stablab.audit";
  j["schema_version"] = kReportSchemaVersion;
  j["seed"] = rep.seed;
  j["trials"] = rep.trials;
  ordered_json moments = ordered_json::array();
  for (const auto& m : rep.moments) {
    moments.push_back({{"q", m.q}, {"worst_ratio", m.worst_ratio}, {"violations", m.violations}});
    out << "sup-moment q=" << m.q << ": violations " << m.violations << ", worst lhs/rhs "
        << format_double(m.worst_ratio) << "\n";
  }
  j["sup_moment"] = moments;
  double worst_conj = 0.0;
  double worst_power = 0.0;
  ordered_json conj = ordered_json::array();
  for (const auto& s : rep.conjugate_sandwich) {
    conj.push_back({{"family", s.family}, {"violation", s.violation}});
    worst_conj = std::max(worst_conj, s.violation);
  }
  ordered_json power = ordered_json::array();
  for (const auto& s : rep.power_sandwich) {
    power.push_back({{"family", s.family}, {"violation", s.violation}});
    worst_power = std::max(worst_power, s.violation);
  }
  j["conjugate_sandwich"] = conj;
  j["power_sandwich"] = power;
  j["passed"] = rep.passed();
  out << "conjugate sandwich: " << rep.conjugate_sandwich.size() << " families, worst violation "
      << format_double(worst_conj) << "\n";
  out << "power sandwich: " << rep.power_sandwich.size() << " families, worst violation "
      << format_double(worst_power) << "\n";
  if (f.out != ".") {
    std::string path = output_path(f, "audit.json");
    write_text(path, j.dump(2) + "\n");
    out << "wrote " << path << "\n";
  }
  out << (rep.passed() ? "audit passed" : "audit FAILED") << "\n";
  return rep.passed() ? kExitOk : kExitAuditViolation;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Stability experiments for utility maximisation on scenario trees", "stablab"};
  app.require_subcommand(1);
  Flags f;

  auto add_common = [&f](CLI::App* sub, bool config_required) {
    auto* c = sub->add_option("--config", f.config, "Experiment config (JSON)");
    if (config_required) c->required();
    sub->add_option("--out", f.out, "Output directory");
    sub->add_option("--seed", f.seed, "Seed for probes and audits");
    sub->add_option("--tol", f.tol, "Solver gradient tolerance");
  };
  CLI::App* solve = app.add_subcommand("solve", "Solve one member of the configured family");
  CLI::App* price = app.add_subcommand("price", "Davis and indifference prices of the configured claim");
  CLI::App* sweep_d = app.add_subcommand("sweep-delta", "Error functionals over a delta grid");
  CLI::App* sweep_pp = app.add_subcommand("sweep-p", "Scaled-strategy diagnostics over a p grid");
  CLI::App* audit = app.add_subcommand("audit", "Sup-moment and sandwich audits");
  for (CLI::App* sub : {solve, price, sweep_d, sweep_pp}) add_common(sub, true);
  for (CLI::App* sub : {solve, price}) sub->add_option("--at", f.at, "Grid value to solve at (default: first)");
  add_common(audit, false);
  audit->add_option("--trials", f.trials, "Number of random supermartingales")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }

  try {
    if (solve->parsed()) return cmd_solve(f, out);
    if (price->parsed()) return cmd_price(f, out);
    if (sweep_d->parsed()) return cmd_sweep(f, true, out, err);
    if (sweep_pp->parsed()) return cmd_sweep(f, false, out, err);
    return cmd_audit(f, out);
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const SolverError& e) {
    err << "solver error: " << e.what() << "\n";
    return kExitSolver;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitSolver;
  }
}

}  // namespace stablab
