#include "stablab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <numeric>
#include <thread>

#include "stablab/entropic.hpp"
#include "stablab/errors.hpp"
#include "stablab/positive.hpp"
#include "stablab/pricing.hpp"

namespace stablab {

std::string to_string(RateModel m) {
  switch (m) {
    case RateModel::f2_plus_g: return "f2_plus_g";
    case RateModel::inverse_one_minus_p: return "inverse_one_minus_p";
    case RateModel::loglog_slope: return "loglog_slope";
  }
  return "unknown";
}

std::string to_string(FitSubset s) { return s == FitSubset::asymptotic ? "asymptotic" : "full"; }

std::size_t SweepReport::column(const std::string& name) const {
  auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw ValidationError("report has no column \"" + name + "\"");
  return static_cast<std::size_t>(it - columns.begin());
}

const std::vector<std::string>& delta_columns() {
  static const std::vector<std::string> cols = {"delta",         "f",         "g",
                                                "l1_wealth_err", "value_err", "bracket_dist",
                                                "davis_err",     "indiff_err", "dq_l1"};
  return cols;
}

const std::vector<std::string>& p_columns() {
  static const std::vector<std::string> cols = {
      "p",          "one_minus_p",   "scaled_dist",    "sup_gap",        "lemma41",
      "lemma41_unscaled", "lemma41_bound", "power_gap", "log_bracket",  "ytilde_over_y",
      "l_p",        "u_p",           "r_super_defect", "rp_sub_defect", "numeraire_max"};
  return cols;
}

namespace {

double r_squared(const std::vector<double>& y, const std::vector<double>& fitted) {
  double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
  double ss_res = 0.0;
  double ss_tot = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    ss_res += (y[i] - fitted[i]) * (y[i] - fitted[i]);
    ss_tot += (y[i] - mean) * (y[i] - mean);
  }
  if (ss_tot == 0.0) return ss_res == 0.0 ? 1.0 : 0.0;
  return 1.0 - ss_res / ss_tot;
}

/// min ||y - c1 a - c2 b|| over c1, c2 >= 0 by checking every active set.
std::pair<double, double> nnls2(const std::vector<double>& a, const std::vector<double>& b,
                                const std::vector<double>& y) {
  double aa = 0, ab = 0, bb = 0, ay = 0, by = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    aa += a[i] * a[i];
    ab += a[i] * b[i];
    bb += b[i] * b[i];
    ay += a[i] * y[i];
    by += b[i] * y[i];
  }
  auto ssr = [&](double c1, double c2) {
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      double r = y[i] - c1 * a[i] - c2 * b[i];
      s += r * r;
    }
    return s;
  };
  std::vector<std::pair<double, double>> candidates = {{0.0, 0.0}};
  if (aa > 0.0) candidates.emplace_back(std::max(0.0, ay / aa), 0.0);
  if (bb > 0.0) candidates.emplace_back(0.0, std::max(0.0, by / bb));
  double det = aa * bb - ab * ab;
  if (det > 1e-14 * aa * bb && aa > 0.0 && bb > 0.0) {
    double c1 = (ay * bb - by * ab) / det;
    double c2 = (by * aa - ay * ab) / det;
    if (c1 >= 0.0 && c2 >= 0.0) candidates.emplace_back(c1, c2);
  }
  auto best = candidates.front();
  double best_ssr = ssr(best.first, best.second);
  for (const auto& c : candidates) {
    double s = ssr(c.first, c.second);
    if (s < best_ssr) {
      best = c;
      best_ssr = s;
    }
  }
  return best;
}

}  // namespace

RateFit fit_points(const FitData& data, RateModel model, FitSubset subset) {
  const std::size_t n = data.x.size();
  if (data.y.size() != n) throw ValidationError("fit: x and y sizes differ");
  if (model == RateModel::f2_plus_g && (data.f.size() != n || data.g.size() != n)) {
    throw ValidationError("fit: f2_plus_g needs f and g for every point");
  }

  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(data.x[i] > 0.0) || !std::isfinite(data.y[i])) continue;
    if (model == RateModel::loglog_slope && !(data.y[i] > 0.0)) continue;
    idx.push_back(i);
  }
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return data.x[a] < data.x[b]; });
  if (subset == FitSubset::asymptotic) idx.resize((idx.size() + 1) / 2);

  const std::size_t params = model == RateModel::inverse_one_minus_p ? 1 : 2;
  if (idx.size() < params) {
    throw ValidationError("fit: underdetermined (" + std::to_string(idx.size()) + " usable points for " +
                          to_string(model) + ")");
  }

  RateFit fit;
  fit.model = model;
  fit.subset = subset;
  fit.points = idx.size();
  std::vector<double> y;
  std::vector<double> fitted;
  switch (model) {
    case RateModel::f2_plus_g: {
      std::vector<double> a, b;
      for (std::size_t i : idx) {
        a.push_back(data.f[i] * data.f[i]);
        b.push_back(data.g[i]);
        y.push_back(data.y[i]);
      }
      auto [c1, c2] = nnls2(a, b, y);
      fit.coefficients = {c1, c2};
      for (std::size_t k = 0; k < y.size(); ++k) fitted.push_back(c1 * a[k] + c2 * b[k]);
      break;
    }
    case RateModel::inverse_one_minus_p: {
      double xy = 0.0, xx = 0.0;
      for (std::size_t i : idx) {
        xy += data.x[i] * data.y[i];
        xx += data.x[i] * data.x[i];
        y.push_back(data.y[i]);
      }
      double c = xy / xx;
      fit.coefficients = {c};
      for (std::size_t i : idx) fitted.push_back(c * data.x[i]);
      break;
    }
    case RateModel::loglog_slope: {
      std::vector<double> lx;
      for (std::size_t i : idx) {
        lx.push_back(std::log(data.x[i]));
        y.push_back(std::log(data.y[i]));
      }
      double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / static_cast<double>(lx.size());
      double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
      double sxy = 0.0, sxx = 0.0;
      for (std::size_t k = 0; k < lx.size(); ++k) {
        sxy += (lx[k] - mx) * (y[k] - my);
        sxx += (lx[k] - mx) * (lx[k] - mx);
      }
      if (sxx == 0.0) throw ValidationError("fit: all abscissae coincide");
      double slope = sxy / sxx;
      double intercept = my - slope * mx;
      fit.coefficients = {slope, intercept};
      for (double v : lx) fitted.push_back(intercept + slope * v);
      break;
    }
  }
  fit.r2 = r_squared(y, fitted);
  return fit;
}

RateFit fit_rate(const SweepReport& report, const std::string& functional, RateModel model,
                 FitSubset subset) {
  if (report.rows.size() < 4) {
    throw ValidationError("fit: a rate fit needs at least 4 grid points, report has " +
                          std::to_string(report.rows.size()));
  }
  FitData data;
  const std::size_t col = report.column(functional);
  if (report.kind == "sweep-delta") {
    const std::size_t cd = report.column("delta");
    const std::size_t cf = report.column("f");
    const std::size_t cg = report.column("g");
    for (const auto& row : report.rows) {
      data.x.push_back(row[cd]);
      data.f.push_back(row[cf]);
      data.g.push_back(row[cg]);
      data.y.push_back(row[col]);
    }
  } else {
    if (model == RateModel::f2_plus_g) throw ValidationError("fit: f2_plus_g applies to delta sweeps only");
    const std::size_t cp = report.column("p");
    for (const auto& row : report.rows) {
      data.x.push_back(1.0 / (1.0 - row[cp]));
      data.y.push_back(row[col]);
    }
  }
  RateFit fit = fit_points(data, model, subset);
  fit.functional = functional;
  return fit;
}

std::vector<std::exception_ptr> parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  std::vector<std::exception_ptr> errors(n);
  std::size_t threads = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("STABLAB_THREADS")) {
    long v = std::strtol(env, nullptr, 10);
    if (v >= 1) threads = static_cast<std::size_t>(v);
  }
  threads = std::min(threads, n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return errors;
}

namespace {

std::string describe(const std::exception_ptr& e) {
  try {
    std::rethrow_exception(e);
  } catch (const std::exception& ex) {
    return ex.what();
  } catch (...) {
    return "unknown error";
  }
}

/// Keeps the leading columns plus the requested functionals, in canonical
/// order.
std::vector<std::size_t> selected_columns(const std::vector<std::string>& all, std::size_t leading,
                                          const std::vector<std::string>& requested) {
  for (const auto& r : requested) {
    if (std::find(all.begin() + static_cast<long>(leading), all.end(), r) == all.end()) {
      throw ValidationError("config: unknown functional \"" + r + "\"");
    }
  }
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (i < leading || requested.empty() ||
        std::find(requested.begin(), requested.end(), all[i]) != requested.end()) {
      keep.push_back(i);
    }
  }
  return keep;
}

/// Fills rows/details in grid order, stopping at the first failed point.
void assemble(SweepReport& report, const std::vector<std::size_t>& keep,
              const std::vector<std::vector<double>>& rows, const std::vector<std::vector<double>>& details,
              const std::vector<std::exception_ptr>& errors) {
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (errors[i]) {
      report.complete = false;
      report.error = "grid point " + std::to_string(i) + ": " + describe(errors[i]);
      return;
    }
    std::vector<double> row;
    for (std::size_t c : keep) row.push_back(rows[i][c]);
    report.rows.push_back(std::move(row));
    report.details.push_back(details[i]);
  }
}

void add_fits(SweepReport& report, const std::vector<std::string>& functionals,
              const std::vector<RateModel>& models) {
  if (!report.complete || report.rows.size() < 4) return;
  for (const auto& name : functionals) {
    if (std::find(report.columns.begin(), report.columns.end(), name) == report.columns.end()) continue;
    for (RateModel m : models) {
      for (FitSubset s : {FitSubset::asymptotic, FitSubset::full}) {
        try {
          report.fits.push_back(fit_rate(report, name, m, s));
        } catch (const ValidationError&) {
          // Too few usable points (e.g. an identically zero functional).
        }
      }
    }
  }
}

void init_report(SweepReport& report, const SweepSpec& spec, const char* kind) {
  report.kind = kind;
  report.seed = spec.seed;
  report.gradient_tol = spec.gradient_tol;
  report.indifference_tol = spec.indifference_tol;
  report.config = spec.source;
}

}  // namespace

SweepReport sweep_delta(const SweepSpec& spec) {
  if (!spec.family.on_real_line()) throw ValidationError("sweep-delta: family must live on the real line");
  SweepReport report;
  init_report(report, spec, "sweep-delta");
  const auto& all = delta_columns();
  const std::vector<std::size_t> keep = selected_columns(all, 3, spec.functionals);
  for (std::size_t c : keep) report.columns.push_back(all[c]);
  report.detail_columns = {"value",           "multiplier",       "davis_price",
                           "indiff_price",    "indiff_residual",  "martingale_defect",
                           "supermartingale_slack", "first_order_residual", "gradient_norm",
                           "iterations"};

  const ScenarioTree& tree = spec.tree;
  SolverOptions solver;
  solver.gradient_tol = spec.gradient_tol;
  IndifferenceOptions iopts;
  iopts.tol = spec.indifference_tol;
  iopts.solver = solver;
  const std::vector<double> xi(tree.leaf_count(), spec.x0);

  const UtilityOnR u0 = family_member_r(spec.family, 0.0);
  if (u0.f() != 0.0) throw ValidationError("sweep-delta: the delta = 0 member must be exponential");

  PrimalSolution ref;
  DualMeasure q;
  double davis0 = 0.0;
  double indiff0 = 0.0;
  try {
    ref = solve_primal(tree, u0, xi, solver);
    q = extract_dual(tree, u0, ref);
    davis0 = davis_price(q, spec.claim).price;
    indiff0 = indifference_price(tree, u0, spec.x0, spec.claim, iopts).price;
  } catch (const SolverError& e) {
    report.complete = false;
    report.error = std::string("reference solve: ") + e.what();
    return report;
  }
  const std::vector<double> x0_terminal = ref.wealth.terminal(tree);
  const std::vector<Measure> probes = default_probes(tree, spec.seed);

  const std::size_t n = spec.grid.size();
  std::vector<std::vector<double>> rows(n), details(n);
  auto errors = parallel_for(n, [&](std::size_t i) {
    const double delta = spec.grid[i];
    const UtilityOnR u = family_member_r(spec.family, delta);
    PrimalSolution sol = solve_primal(tree, u, xi, solver);
    DualMeasure dual = extract_dual(tree, u, sol);
    PriceResult davis = davis_price(dual, spec.claim);
    PriceResult indiff = indifference_price(tree, u, spec.x0, spec.claim, iopts);
    OptimalityReport opt = verify_optimality(tree, u, sol, dual, probes);

    std::vector<double> xt = sol.wealth.terminal(tree);
    double l1 = 0.0;
    double dq = 0.0;
    for (std::size_t k = 0; k < xt.size(); ++k) {
      l1 += q.measure.weights[k] * std::abs(xt[k] - x0_terminal[k]);
      dq += std::abs(dual.measure.weights[k] - q.measure.weights[k]);
    }
    rows[i] = {delta,
               u.f(),
               u.g(),
               l1,
               std::abs(sol.value - ref.value),
               bracket_distance(tree, q.measure, sol.strategy, ref.strategy),
               std::abs(davis.price - davis0),
               std::abs(indiff.price - indiff0),
               dq};
    details[i] = {sol.value,
                  dual.multiplier,
                  davis.price,
                  indiff.price,
                  indiff.residual,
                  opt.martingale_defect,
                  opt.supermartingale_slack,
                  opt.first_order_residual,
                  sol.gradient_norm,
                  static_cast<double>(sol.iterations)};
  });
  assemble(report, keep, rows, details, errors);
  add_fits(report, {"l1_wealth_err", "value_err", "bracket_dist", "davis_err", "indiff_err", "dq_l1"},
           {RateModel::loglog_slope, RateModel::f2_plus_g});
  return report;
}

SweepReport sweep_p(const SweepSpec& spec) {
  if (spec.family.on_real_line()) throw ValidationError("sweep-p: family must live on the positive line");
  SweepReport report;
  init_report(report, spec, "sweep-p");
  const auto& all = p_columns();
  const std::vector<std::size_t> keep = selected_columns(all, 2, spec.functionals);
  for (std::size_t c : keep) report.columns.push_back(all[c]);
  report.detail_columns = {"value",          "multiplier",      "pure_multiplier", "pure_scaled_dist",
                           "pure_sup_gap",   "opportunity_l0",  "opportunity_gap", "gradient_norm",
                           "iterations"};

  const ScenarioTree& tree = spec.tree;
  std::vector<double> weight(spec.claim.size());
  for (std::size_t k = 0; k < weight.size(); ++k) weight[k] = std::exp(spec.claim[k]);
  const Measure physical = physical_measure(tree);
  PositiveOptions popts;
  popts.gradient_tol = spec.gradient_tol;
  SolverOptions solver;
  solver.gradient_tol = spec.gradient_tol;

  ExponentialHedge hedge;
  try {
    hedge = exponential_hedge(tree, spec.claim, spec.x0, solver);
  } catch (const SolverError& e) {
    report.complete = false;
    report.error = std::string("exponential hedge: ") + e.what();
    return report;
  }

  const std::size_t n = spec.grid.size();
  std::vector<std::vector<double>> rows(n), details(n);
  auto errors = parallel_for(n, [&](std::size_t i) {
    const double p = spec.grid[i];
    const UtilityOnRPlus u = family_member_rplus(spec.family, p);
    PositiveSolution general = solve_power_field(tree, UtilityField::make(u, weight), spec.x0, popts);
    PositiveSolution pure = solve_power_field(tree, UtilityField::make(make_power(p), weight), spec.x0, popts);
    AuxMeasure aux = auxiliary_measure(tree, pure, spec.seed + i, 10);
    RatioDiagnostics diag = ratio_diagnostics(tree, u, general, pure, aux);
    OpportunityProcess opp = opportunity_process(tree, p, weight, popts);
    const double l0 = opp.values[0];

    rows[i] = {p,
               1.0 - p,
               scaled_strategy_distance(tree, general.fractions, hedge, p, physical),
               scaled_strategy_gap(tree, general.fractions, hedge, p),
               diag.lemma_quantity,
               diag.lemma_quantity_unscaled,
               diag.lemma_bound,
               diag.power_gap,
               diag.log_bracket,
               pure.multiplier / general.multiplier,
               u.lower(),
               u.upper(),
               diag.supermartingale_defect,
               diag.submartingale_defect,
               aux.numeraire_max};
    details[i] = {general.value,
                  general.multiplier,
                  pure.multiplier,
                  scaled_strategy_distance(tree, pure.fractions, hedge, p, physical),
                  scaled_strategy_gap(tree, pure.fractions, hedge, p),
                  l0,
                  std::abs(l0 * std::pow(spec.x0, p - 1.0) - pure.multiplier),
                  general.gradient_norm,
                  static_cast<double>(general.iterations)};
  });
  assemble(report, keep, rows, details, errors);
  add_fits(report, {"scaled_dist", "sup_gap", "lemma41", "power_gap"},
           {RateModel::inverse_one_minus_p, RateModel::loglog_slope});
  return report;
}

}  // namespace stablab
