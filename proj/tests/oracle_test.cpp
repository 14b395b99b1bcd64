#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "oed/oracle.hpp"
#include "test_models.hpp"

namespace oed {
namespace {

std::vector<Eigen::VectorXd> scalars(const std::vector<double>& v) {
  std::vector<Eigen::VectorXd> out;
  for (double x : v) out.push_back(Eigen::VectorXd::Constant(1, x));
  return out;
}

class FlyOracle : public ::testing::Test {
 protected:
  DesignProblem problem(std::vector<double> inputs, std::size_t horizon) const {
    return {model, obs, FlyModel::nominal_parameters(), InputGrid(1, std::move(inputs)), horizon};
  }
  FlyModel model;
  PoissonTrapModel obs;
};

TEST_F(FlyOracle, TwoCandidateEnumeration) {
  const OracleReport r = exhaustive_search(problem({0, 1}, 1));
  EXPECT_EQ(r.sequences_evaluated, 4u);
  EXPECT_DOUBLE_EQ(r.best_objective, 1e-3);
  EXPECT_EQ(r.best_indices, (std::vector<std::size_t>{0, 1}));
}

TEST_F(FlyOracle, SingleCandidate) {
  const OracleReport r = exhaustive_search(problem({0.4}, 3));
  EXPECT_EQ(r.sequences_evaluated, 1u);
  const double direct =
      trace_objective(total_fisher_information(obs, simulate(model, FlyModel::nominal_parameters(),
                                                             scalars({0.4, 0.4, 0.4, 0.4}))));
  EXPECT_EQ(r.best_objective, direct);
}

TEST_F(FlyOracle, ThreeCandidateEnumeration) {
  const OracleReport r = exhaustive_search(problem({0, 0.5, 1}, 1));
  EXPECT_EQ(r.sequences_evaluated, 9u);
  EXPECT_EQ(r.best_indices, (std::vector<std::size_t>{1, 2}));
  EXPECT_DOUBLE_EQ(r.best_objective, 5e-4 + (250000.0 * 250000.0 + 0.5625) / 625.0);

  // Independent brute force over the scalar reference recursion.
  const testing::FlyReference ref;
  double best = -1;
  for (double a : {0.0, 0.5, 1.0}) {
    for (double b : {0.0, 0.5, 1.0}) best = std::max(best, ref.objective({a, b}));
  }
  EXPECT_NEAR(r.best_objective, best, 1e-12 * best);
}

TEST_F(FlyOracle, BestDominatesRandomSequences) {
  const std::vector<double> cands = {0, 0.2, 0.4, 0.6, 0.8, 0.95};
  const OracleReport r = exhaustive_search(problem(cands, 4));
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<std::size_t> pick(0, cands.size() - 1);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> u(5);
    for (double& v : u) v = cands[pick(rng)];
    const double obj = trace_objective(
        total_fisher_information(obs, simulate(model, FlyModel::nominal_parameters(), scalars(u))));
    EXPECT_GE(r.best_objective, obj);
  }
  // Worker count does not change the lexicographic winner.
  const OracleReport r3 = exhaustive_search(problem(cands, 4), {10'000'000, 3});
  EXPECT_EQ(r3.best_indices, r.best_indices);
  EXPECT_EQ(r3.best_objective, r.best_objective);
}

TEST_F(FlyOracle, BudgetExceeded) {
  try {
    exhaustive_search(problem(std::vector<double>(100, 0.5), 10));
    FAIL() << "expected BudgetExceeded";
  } catch (const BudgetExceeded& e) {
    EXPECT_GT(e.required(), 10'000'000u);
  }
  EXPECT_THROW(exhaustive_search(problem({0, 1}, 4), {31, 1}), BudgetExceeded);
  EXPECT_EQ(sequence_count(10, 4), 100000u);
  EXPECT_FALSE(sequence_count(100, 10).has_value());
}

TEST_F(FlyOracle, FiniteDifferenceExamples) {
  const ParameterVector theta = FlyModel::nominal_parameters();
  for (const RowMatrix& s : fd_sensitivity(model, theta, scalars({0, 0, 0, 0}), 1e-6)) {
    EXPECT_EQ(s(0, 0), 0.0);
    EXPECT_NEAR(s(0, 1), 1.0, 1e-6);
  }
  const auto fd = fd_sensitivity(model, theta, scalars({0.5, 0.2}), 1e-6);
  EXPECT_NEAR(fd[1](0, 0), 250000.0, 1e-5 * 250000.0);
  EXPECT_NEAR(fd[1](0, 1), 0.75, 1e-5 * 0.75);

  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> us(0, 1);
  std::vector<double> u(21);
  for (double& v : u) v = us(rng);
  const auto a = fd_sensitivity(model, theta, scalars(u), 1e-5);
  const auto b = fd_sensitivity(model, theta, scalars(u), 1e-6);
  for (std::size_t t = 0; t < u.size(); ++t) {
    for (Eigen::Index k = 0; k < 2; ++k) {
      const double scale = std::max(std::abs(a[t](0, k)), std::abs(b[t](0, k)));
      if (scale > 0) EXPECT_LE(std::abs(a[t](0, k) - b[t](0, k)) / scale, 1e-4);
    }
  }
  EXPECT_THROW(fd_sensitivity(model, theta, scalars({0.1}), 0.0), std::invalid_argument);
}

TEST_F(FlyOracle, MonteCarloSingleStage) {
  const ParameterVector theta = FlyModel::nominal_parameters();
  const MonteCarloFisher mc = monte_carlo_fisher(model, obs, theta, scalars({0.5}), 1'000'000, 17, 1);
  EXPECT_LE(std::abs(mc.estimate(1, 1) - 5e-4), 3 * mc.standard_errors(1, 1));
  EXPECT_LE(std::abs(mc.estimate(0, 1)), 3 * mc.standard_errors(0, 1));
  EXPECT_LE(std::abs(mc.estimate(1, 0)), 3 * mc.standard_errors(1, 0));
  EXPECT_LE(std::abs(mc.mean_score[1]), 3 * mc.mean_score_errors[1]);
  EXPECT_EQ(mc.samples, 1'000'000u);
  EXPECT_EQ(mc.seed, 17u);
}

TEST_F(FlyOracle, MonteCarloIndependentOfWorkers) {
  const ParameterVector theta = FlyModel::nominal_parameters();
  const auto inputs = scalars({0.5, 0.3, 0.2, 0.1});
  const MonteCarloFisher a = monte_carlo_fisher(model, obs, theta, inputs, 100'000, 5, 1);
  const MonteCarloFisher b = monte_carlo_fisher(model, obs, theta, inputs, 100'000, 5, 4);
  EXPECT_EQ(a.estimate, b.estimate);
  EXPECT_EQ(a.standard_errors, b.standard_errors);
}

TEST(MonteCarlo, ZeroSensitivityIsExactlyZero) {
  testing::ParameterFreeModel model;
  GaussianModel obs({1.0});
  const MonteCarloFisher mc =
      monte_carlo_fisher(model, obs, ParameterVector({1.0}, {}), scalars({0.1, 0.2}), 1000, 1);
  EXPECT_EQ(mc.estimate(0, 0), 0.0);
  EXPECT_EQ(mc.standard_errors(0, 0), 0.0);
  EXPECT_EQ(mc.mean_score[0], 0.0);
}

TEST(PoissonSeries, ScaledToOne) {
  for (double lambda : {0.5, 1.0, 5.0, 320.0}) {
    const PoissonSeries s = poisson_info_series(lambda, 1000);
    EXPECT_TRUE(s.tail_ok);
    EXPECT_NEAR(s.value * lambda, 1.0, 1e-9) << lambda;
  }
  const PoissonSeries truncated = poisson_info_series(320.0, 100);
  EXPECT_FALSE(truncated.tail_ok);
  EXPECT_THROW(poisson_info_series(0.0, 10), std::domain_error);
}

}  // namespace
}  // namespace oed
