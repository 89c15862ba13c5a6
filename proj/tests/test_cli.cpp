#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "stablab/cli.hpp"

namespace fs = std::filesystem;

namespace {

int run(std::vector<std::string> args, std::string* out_text = nullptr) {
  args.insert(args.begin(), "stablab");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code = stablab::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  if (out_text) *out_text = out.str();
  return code;
}

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("stablab_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string first_line(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  return line;
}

const std::string kConfigs = STABLAB_CONFIG_DIR;

}  // namespace

TEST(Cli, ValidationExitCodes) {
  EXPECT_EQ(run({"sweep-delta"}), stablab::kExitValidation);
  EXPECT_EQ(run({"sweep-delta", "--config", "/nonexistent/x.json"}), stablab::kExitValidation);
  EXPECT_EQ(run({"frobnicate"}), stablab::kExitValidation);
  EXPECT_EQ(run({"sweep-delta", "--config", kConfigs + "/binomial_sine.json", "--bogus"}), stablab::kExitValidation);
  // wrong sweep for the family
  fs::path dir = scratch("wrong");
  EXPECT_EQ(run({"sweep-p", "--config", kConfigs + "/binomial_sine.json", "--out", dir.string()}),
            stablab::kExitValidation);
}

TEST(Cli, SweepWritesCsvAndJson) {
  fs::path dir = scratch("sweep");
  ASSERT_EQ(run({"sweep-delta", "--config", kConfigs + "/binomial_sine.json", "--out", dir.string()}),
            stablab::kExitOk);
  EXPECT_EQ(first_line(dir / "binomial_sine.csv"),
            "delta,f,g,l1_wealth_err,value_err,bracket_dist,davis_err,indiff_err,dq_l1");
  EXPECT_TRUE(fs::exists(dir / "binomial_sine.json"));
}

TEST(Cli, SolverFailureExitCode) {
  fs::path dir = scratch("fail");
  EXPECT_EQ(run({"sweep-delta", "--config", kConfigs + "/binomial_exponential.json", "--out", dir.string(),
                 "--tol", "1e-300"}),
            stablab::kExitSolver);
}

TEST(Cli, SolveAndPrice) {
  fs::path dir = scratch("solve");
  EXPECT_EQ(run({"solve", "--config", kConfigs + "/binomial_sine.json", "--out", dir.string(), "--at", "0.1"}),
            stablab::kExitOk);
  EXPECT_TRUE(fs::exists(dir / "binomial_sine_solve.json"));
  EXPECT_EQ(run({"price", "--config", kConfigs + "/binomial_sine.json", "--out", dir.string()}), stablab::kExitOk);
  EXPECT_TRUE(fs::exists(dir / "binomial_sine_price.json"));
}

TEST(Cli, AuditPasses) {
  std::string text;
  EXPECT_EQ(run({"audit", "--seed", "3", "--trials", "200"}, &text), stablab::kExitOk);
  EXPECT_EQ(run({"audit", "--trials", "10"}), stablab::kExitValidation);
}
