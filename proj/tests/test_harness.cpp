#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>

#include <json.hpp>

#include "stablab/config.hpp"
#include "stablab/errors.hpp"
#include "stablab/harness.hpp"
#include "stablab/report.hpp"

using namespace stablab;

namespace {

const char* kExponentialConfig = R"({
  "market": {"lattice": {"s0": 1, "u": 2, "d": 0.5, "q": 0.5, "steps": 1}},
  "family": {"kind": "exponential"},
  "grid": [0.4, 0.2, 0.1, 0.05, 0.0],
  "claim": {"type": "call", "strike": 1.0}
})";

const char* kPowerConfig = R"({
  "market": {"lattice": {"s0": 1, "u": 2, "d": 0.5, "q": 0.5, "steps": 2}},
  "family": {"kind": "log_sine", "p0": -3, "a": 0.2, "omega": 1},
  "grid": [-3, -7, -15, -31],
  "x0": 1.0,
  "seed": 5
})";

}  // namespace

TEST(Fit, RecoversSyntheticCoefficients) {
  FitData d;
  for (double delta : {0.4, 0.2, 0.1, 0.05, 0.025, 0.0125}) {
    double f = 0.2 * delta, g = 0.5 * delta;
    d.x.push_back(delta);
    d.f.push_back(f);
    d.g.push_back(g);
    d.y.push_back(3 * f * f + 5 * g);
  }
  RateFit fit = fit_points(d, RateModel::f2_plus_g, FitSubset::full);
  EXPECT_NEAR(fit.coefficients[0], 3.0, 1e-6);
  EXPECT_NEAR(fit.coefficients[1], 5.0, 1e-9);
  EXPECT_NEAR(fit.r2, 1.0, 1e-12);
  EXPECT_EQ(fit.points, 6u);
  EXPECT_EQ(fit_points(d, RateModel::f2_plus_g, FitSubset::asymptotic).points, 3u);
}

TEST(Fit, InverseAndLogLog) {
  FitData d;
  for (double p : {-3.0, -7.0, -15.0, -31.0}) {
    d.x.push_back(1.0 / (1.0 - p));
    d.y.push_back(7.0 / (1.0 - p));
  }
  RateFit inv = fit_points(d, RateModel::inverse_one_minus_p, FitSubset::full);
  EXPECT_NEAR(inv.coefficients[0], 7.0, 1e-12);
  EXPECT_NEAR(inv.r2, 1.0, 1e-12);
  FitData e;
  for (double x : {0.5, 0.25, 0.125, 0.0625}) {
    e.x.push_back(x);
    e.y.push_back(2.0 * std::pow(x, 1.5));
  }
  RateFit ll = fit_points(e, RateModel::loglog_slope, FitSubset::full);
  EXPECT_NEAR(ll.coefficients[0], 1.5, 1e-12);
  EXPECT_NEAR(ll.coefficients[1], std::log(2.0), 1e-12);
}

TEST(Fit, Underdetermined) {
  FitData d{{0.1}, {}, {}, {1.0}};
  EXPECT_THROW(fit_points(d, RateModel::loglog_slope, FitSubset::full), ValidationError);
  SweepReport r;
  r.kind = "sweep-delta";
  r.columns = delta_columns();
  r.rows.assign(3, std::vector<double>(r.columns.size(), 1.0));
  EXPECT_THROW(fit_rate(r, "l1_wealth_err", RateModel::loglog_slope), ValidationError);
}

TEST(Config, Validation) {
  EXPECT_NO_THROW(parse_spec(kExponentialConfig));
  std::string bad_grid = kExponentialConfig;
  bad_grid.replace(bad_grid.find("0.4, 0.2"), 8, "0.2, 0.4");
  EXPECT_THROW(parse_spec(bad_grid), ValidationError);
  EXPECT_THROW(parse_spec(R"({"market": {"lattice": {"u": 2, "d": 0.5, "q": 0.5, "steps": 1}},
                               "family": {"kind": "sine", "a": 0.2}, "grid": [0.1, -0.1]})"),
               ValidationError);
  EXPECT_THROW(parse_spec(R"({"market": {"lattice": {"u": 2, "d": 0.5, "q": 0.5, "steps": 1}},
                               "family": {"kind": "cubic"}, "grid": [0.1]})"),
               ValidationError);
  EXPECT_THROW(parse_spec(R"({"market": {"lattice": {"u": 2, "d": 0.5, "q": 0.5, "steps": 1}},
                               "family": {"kind": "power"}, "grid": [-2], "x0": 0})"),
               ValidationError);
  EXPECT_THROW(parse_spec("[1, 2"), ValidationError);
}

TEST(SweepDelta, PureExponentialClosedForm) {
  SweepReport r = sweep_delta(parse_spec(kExponentialConfig));
  ASSERT_TRUE(r.complete) << r.error;
  ASSERT_EQ(r.rows.size(), 5u);
  const double h0 = std::log(2.0) / 1.5;
  for (const auto& row : r.rows) {
    double delta = row[r.column("delta")];
    // Q-expected |dS| is 2/3 on this tree.
    EXPECT_NEAR(row[r.column("l1_wealth_err")], 2.0 / 3 * h0 * delta / (1 + delta), 1e-10);
    EXPECT_NEAR(row[r.column("davis_err")], 0.0, 1e-12);
    EXPECT_NEAR(row[r.column("dq_l1")], 0.0, 1e-10);
    EXPECT_DOUBLE_EQ(row[r.column("f")], 0.0);
  }
  EXPECT_NEAR(r.rows.back()[r.column("l1_wealth_err")], 0.0, 1e-14);
  EXPECT_FALSE(r.fits.empty());
}

TEST(SweepDelta, ReferenceFailureGivesIncompleteReport) {
  SweepSpec s = parse_spec(kExponentialConfig);
  s.gradient_tol = 1e-300;
  SweepReport r = sweep_delta(s);
  EXPECT_FALSE(r.complete);
  EXPECT_FALSE(r.error.empty());
  EXPECT_TRUE(r.rows.empty());
  nlohmann::json j = nlohmann::json::parse(to_json(r));
  EXPECT_FALSE(j.at("complete").get<bool>());
}

TEST(SweepP, DiagnosticsAndDeterminism) {
  SweepSpec s = parse_spec(kPowerConfig);
  SweepReport a = sweep_p(s);
  ASSERT_TRUE(a.complete) << a.error;
  ASSERT_EQ(a.rows.size(), 4u);
  double prev = 1e9;
  for (const auto& row : a.rows) {
    EXPECT_LE(row[a.column("lemma41_unscaled")], row[a.column("lemma41_bound")] + 1e-12);
    EXPECT_LE(row[a.column("numeraire_max")], 1.0 + 1e-9);
    EXPECT_LT(row[a.column("sup_gap")], prev);
    prev = row[a.column("sup_gap")];
  }
  ::setenv("STABLAB_THREADS", "1", 1);
  SweepReport b = sweep_p(s);
  ::unsetenv("STABLAB_THREADS");
  EXPECT_EQ(to_csv(a), to_csv(b));
  EXPECT_EQ(to_json(a), to_json(b));
}

TEST(Report, CsvLayout) {
  SweepReport r;
  r.kind = "sweep-delta";
  r.columns = {"delta", "f"};
  r.rows = {{0.1, 0.02}};
  EXPECT_EQ(to_csv(r), "delta,f\n0.10000000000000001,0.02\n");
  EXPECT_EQ(format_double(std::nan("")), "nan");
  nlohmann::json j = nlohmann::json::parse(to_json(r));
  EXPECT_EQ(j.at("schema_version").get<int>(), kReportSchemaVersion);
}

TEST(ParallelFor, CapturesExceptionsPerIndex) {
  std::vector<int> hit(8, 0);
  auto errors = parallel_for(8, [&](std::size_t i) {
    hit[i] = 1;
    if (i == 3) throw std::runtime_error("boom");
  });
  for (std::size_t i = 0; i < 8; ++i) {
    EXPECT_EQ(hit[i], 1);
    EXPECT_EQ(static_cast<bool>(errors[i]), i == 3);
  }
}
