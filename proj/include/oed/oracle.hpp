#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "oed/dp_solver.hpp"
#include "oed/model.hpp"
#include "oed/observation.hpp"
#include "oed/sensitivity.hpp"

namespace oed {

struct OracleComparison {
  double dp_objective;
  double ratio;
};

struct OracleReport {
  std::vector<Eigen::VectorXd> best_inputs;
  std::vector<std::size_t> best_indices;
  double best_objective = 0.0;
  std::uint64_t sequences_evaluated = 0;
  std::optional<OracleComparison> comparison;
};

class BudgetExceeded : public std::runtime_error {
 public:
  BudgetExceeded(std::uint64_t required, std::uint64_t budget);
  std::uint64_t required() const { return required_; }

 private:
  std::uint64_t required_;
};

struct ExhaustiveOptions {
  std::uint64_t budget = 10'000'000;
  std::size_t workers = 0;
};

/// q^(N+1), or nullopt if it overflows 64 bits.
std::optional<std::uint64_t> sequence_count(std::size_t candidates, std::size_t horizon);

/// Evaluates every input sequence over problem.inputs by exact simulation and
/// returns the first maximizer in lexicographic candidate-index order.
OracleReport exhaustive_search(const DesignProblem& problem, const ExhaustiveOptions& options = {});

/// Records dp_objective / best_objective in the report.
void compare_with(OracleReport& report, double dp_objective);

/// Central differences of the state trajectory in each parameter, with
/// relative step h (absolute when the parameter is zero). One n x p matrix per
/// time step.
std::vector<RowMatrix> fd_sensitivity(const SystemModel& model, const ParameterVector& theta,
                                      const std::vector<Eigen::VectorXd>& inputs, double h);

struct MonteCarloFisher {
  Eigen::MatrixXd estimate;
  Eigen::MatrixXd standard_errors;
  Eigen::VectorXd mean_score;
  Eigen::VectorXd mean_score_errors;
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
};

/// Empirical E[g g^T] of the full-trajectory score g = sum_t S_t^T score_x.
/// Samples are drawn in fixed chunks with per-chunk streams derived from the
/// seed, so results do not depend on the worker count.
MonteCarloFisher monte_carlo_fisher(const SystemModel& model, const ObservationModel& obs,
                                    const ParameterVector& theta,
                                    const std::vector<Eigen::VectorXd>& inputs,
                                    std::uint64_t sample_count, std::uint64_t seed,
                                    std::size_t workers = 0);

struct PoissonSeries {
  double value;
  double tail_mass;
  bool tail_ok;
};

/// sum_{y=0}^{truncation} Pois(y; lambda) (y / lambda - 1)^2.
PoissonSeries poisson_info_series(double lambda, std::size_t truncation);

void write_oracle_report_csv(std::ostream& out, const OracleReport& report);
void write_oracle_summary(std::ostream& out, const OracleReport& report);

}  // namespace oed
