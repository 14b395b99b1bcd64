#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "oed/cli.hpp"

namespace oed::cli {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

double read_key(const fs::path& p, const std::string& key) {
  std::ifstream in(p);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind(key + " = ", 0) == 0) return std::stod(line.substr(key.size() + 3));
  }
  throw std::runtime_error("key not found: " + key);
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("oed_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  RunConfig parse(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
  }
  RunConfig base() {
    RunConfig cfg = parse("theta0 = 5e-4, 1000\n");
    cfg.output_dir = dir_;
    return cfg;
  }
  fs::path write(const std::string& name, const std::string& text) {
    std::ofstream(dir_ / name) << text;
    return dir_ / name;
  }

  fs::path dir_;
};

TEST_F(CliTest, ParsesKeysListsAndComments) {
  const RunConfig cfg = parse(
      "# fly run\n"
      "theta0 = 5e-4, 1000   # r, K\n"
      "horizon = 4\n"
      "grid = 0:1250:11, -3e5:1.4e6:21, -0.3:1.5:5\n"
      "extra_inputs =\n"
      "export_tables = yes\n");
  EXPECT_EQ(cfg.theta0, (std::vector<double>{5e-4, 1000}));
  EXPECT_EQ(cfg.horizon, 4u);
  ASSERT_TRUE(cfg.grid.has_value());
  EXPECT_EQ(cfg.grid->size(), 3u);
  EXPECT_EQ((*cfg.grid)[1].lo, -3e5);
  EXPECT_EQ((*cfg.grid)[1].points, 21u);
  EXPECT_TRUE(cfg.extra_inputs.empty());
  EXPECT_TRUE(cfg.export_tables);
  EXPECT_FALSE(parse("theta0 = 1\ngrid = auto\n").grid.has_value());
}

TEST_F(CliTest, ConfigErrorsNameTheKey) {
  auto message = [&](const std::string& text) {
    try {
      parse(text);
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  EXPECT_NE(message("horizon = 3\n").find("theta0"), std::string::npos);
  const std::string unknown = message("theta0 = 1\nhorizn = 3\n");
  EXPECT_NE(unknown.find("line 2"), std::string::npos);
  EXPECT_NE(unknown.find("horizn"), std::string::npos);
  EXPECT_NE(message("theta0 = 1\ntheta0 = 2\n").find("theta0"), std::string::npos);
  EXPECT_NE(message("theta0 = 1\nhorizon = -2\n").find("horizon"), std::string::npos);
  EXPECT_NE(message("theta0 = 1\ngrid = 0:1\n").find("grid"), std::string::npos);
  EXPECT_NE(message("theta0 = abc\n").find("theta0"), std::string::npos);
}

TEST_F(CliTest, UnknownModelIsConfigError) {
  RunConfig cfg = base();
  cfg.model = "frog";
  std::ostringstream log;
  EXPECT_EQ(cmd_solve(cfg, log), kConfigError);
  EXPECT_NE(log.str().find("frog"), std::string::npos);
}

TEST_F(CliTest, EvaluateAllZeroInputs) {
  const fs::path inputs = write("zeros.csv", "t,u\n0,0\n1,0\n2,0\n3,0\n");
  std::ostringstream log;
  ASSERT_EQ(cmd_evaluate(base(), inputs, log), kOk) << log.str();
  EXPECT_EQ(read_key(dir_ / "evaluation.txt", "objective"), 0.0);
  EXPECT_EQ(slurp(dir_ / "information.csv"), "row,r,K\nr,0,0\nK,0,0\n");
}

TEST_F(CliTest, EvaluateTwoStepExample) {
  const fs::path inputs = write("two.csv", "t,u\n0,0.5\n1,1\n");
  std::ostringstream log;
  ASSERT_EQ(cmd_evaluate(base(), inputs, log), kOk) << log.str();
  const double expected = 5e-4 + (250000.0 * 250000.0 + 0.5625) / 625.0;
  EXPECT_NEAR(read_key(dir_ / "evaluation.txt", "objective"), expected, 1e-12 * expected);
  const std::string states = slurp(dir_ / "evaluate_states.csv");
  EXPECT_EQ(states.substr(0, states.find('\n')), "t,x,S_r,S_K");
}

TEST_F(CliTest, EvaluateRejectsBadInputFiles) {
  std::ostringstream log;
  EXPECT_EQ(cmd_evaluate(base(), write("gap.csv", "t,u\n0,0.5\n2,0.5\n"), log), kConfigError);
  EXPECT_NE(log.str().find("line 3"), std::string::npos);
  EXPECT_EQ(cmd_evaluate(base(), write("range.csv", "t,u\n0,1.5\n"), log), kConfigError);
  EXPECT_EQ(cmd_evaluate(base(), write("header.csv", "time,u\n0,0.5\n"), log), kConfigError);
  EXPECT_EQ(cmd_evaluate(base(), dir_ / "missing.csv", log), kConfigError);
}

TEST_F(CliTest, SolveThenEvaluateRoundTrip) {
  RunConfig cfg = base();
  cfg.horizon = 3;
  cfg.input_points = 8;
  cfg.grid_points = 15;
  cfg.pilot_count = 10;
  std::ostringstream log;
  ASSERT_EQ(cmd_solve(cfg, log), kOk) << log.str();
  const double solved = read_key(dir_ / "summary.txt", "objective");
  ASSERT_EQ(cmd_evaluate(cfg, dir_ / "inputs.csv", log), kOk) << log.str();
  EXPECT_EQ(read_key(dir_ / "evaluation.txt", "objective"), solved);
  EXPECT_GT(solved, 0.0);
}

TEST_F(CliTest, HorizonZeroWritesSingleRow) {
  RunConfig cfg = base();
  cfg.horizon = 0;
  cfg.input_points = 5;
  cfg.grid_points = 5;
  cfg.pilot_count = 2;
  std::ostringstream log;
  ASSERT_EQ(cmd_solve(cfg, log), kOk) << log.str();
  // Terminal stage takes the input with the most information: u = 0.99.
  EXPECT_EQ(slurp(dir_ / "inputs.csv"), "t,u\n0,0.98999999999999999\n");
}

TEST_F(CliTest, ExportedTablesAndWorkerIndependentOutput) {
  RunConfig cfg = base();
  cfg.horizon = 2;
  cfg.input_points = 6;
  cfg.grid_points = 7;
  cfg.pilot_count = 5;
  cfg.export_tables = true;
  std::ostringstream log;
  cfg.workers = 1;
  ASSERT_EQ(cmd_solve(cfg, log), kOk) << log.str();
  std::vector<std::string> single;
  const std::vector<std::string> files = {"inputs.csv", "states.csv", "value_0.csv", "policy_1.csv", "value_2.bin"};
  for (const auto& f : files) single.push_back(slurp(dir_ / f));
  cfg.workers = 3;
  ASSERT_EQ(cmd_solve(cfg, log), kOk) << log.str();
  for (std::size_t i = 0; i < files.size(); ++i) EXPECT_EQ(slurp(dir_ / files[i]), single[i]) << files[i];
  EXPECT_TRUE(fs::exists(dir_ / "policy_2.bin"));
}

TEST_F(CliTest, VerifyPoissonPasses) {
  std::ostringstream log;
  EXPECT_EQ(cmd_verify(base(), "poisson", log), kOk) << log.str();
  EXPECT_TRUE(fs::exists(dir_ / "poisson_report.csv"));
}

TEST_F(CliTest, VerifyOracleOverBudgetIsConfigError) {
  std::ostringstream log;
  EXPECT_EQ(cmd_verify(base(), "oracle", log), kConfigError);
  EXPECT_NE(log.str().find("budget"), std::string::npos);
}

TEST_F(CliTest, VerifyOracleSmallProblem) {
  RunConfig cfg = base();
  cfg.horizon = 2;
  cfg.input_points = 5;
  cfg.input_hi = 0.9;
  cfg.extra_inputs.clear();
  cfg.grid_points = 31;
  std::ostringstream log;
  EXPECT_EQ(cmd_verify(cfg, "oracle", log), kOk) << log.str();
}

TEST_F(CliTest, VerifyUnknownCheck) {
  std::ostringstream log;
  EXPECT_EQ(cmd_verify(base(), "magic", log), kConfigError);
}

int run_binary(const std::string& args) {
  const int status = std::system((std::string(OED_BINARY) + " " + args + " > /dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST_F(CliTest, BinaryExitCodes) {
  const fs::path good = write("good.cfg", "theta0 = 5e-4, 1000\noutput_dir = " + dir_.string() + "\n");
  const fs::path bad = write("bad.cfg", "horizon = 3\n");
  const fs::path inputs = write("in.csv", "t,u\n0,0.5\n1,1\n");
  EXPECT_EQ(run_binary("verify " + good.string() + " poisson"), 0);
  EXPECT_EQ(run_binary("evaluate " + good.string() + " " + inputs.string()), 0);
  EXPECT_EQ(run_binary("evaluate " + bad.string() + " " + inputs.string()), 1);
  EXPECT_EQ(run_binary("verify " + good.string() + " nonsense"), 1);
  EXPECT_EQ(run_binary("frobnicate"), 1);
  EXPECT_EQ(run_binary("--help"), 0);
}

}  // namespace
}  // namespace oed::cli
