#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "oed/grid.hpp"
#include "oed/model.hpp"
#include "oed/observation.hpp"
#include "oed/sensitivity.hpp"

namespace oed {

/// Finite set of candidate inputs searched at every stage (q x m, row-major).
class InputGrid {
 public:
  InputGrid(std::size_t input_dim, std::vector<double> candidates);

  /// `points` uniform scalar inputs on [lo, hi], followed by `extras`.
  static InputGrid uniform(double lo, double hi, std::size_t points,
                           std::vector<double> extras = {});

  std::size_t size() const { return candidates_.size() / input_dim_; }
  std::size_t input_dim() const { return input_dim_; }
  std::span<const double> candidate(std::size_t i) const {
    return {candidates_.data() + i * input_dim_, input_dim_};
  }
  Eigen::VectorXd candidate_vector(std::size_t i) const;

 private:
  std::size_t input_dim_;
  std::vector<double> candidates_;
};

/// Everything that defines a design problem apart from the state grid.
struct DesignProblem {
  const SystemModel& model;
  const ObservationModel& obs;
  ParameterVector theta;
  InputGrid inputs;
  std::size_t horizon;
  /// Diagonal trace weights; empty means identity.
  std::vector<double> weights = {};

  std::size_t augmented_dim() const;
  /// Throws std::invalid_argument on inconsistent dimensions.
  void validate() const;
  void validate(const GridSpec& grid) const;
};

/// Raised when a propagated augmented state is not finite.
class NumericError : public std::runtime_error {
 public:
  NumericError(std::size_t stage, const std::string& what)
      : std::runtime_error("stage " + std::to_string(stage) + ": " + what), stage_(stage) {}
  std::size_t stage() const { return stage_; }

 private:
  std::size_t stage_;
};

struct SolverOptions {
  /// 0 selects std::thread::hardware_concurrency().
  std::size_t workers = 0;
  /// When false only J_0 and J_1 are kept after the sweep.
  bool keep_all_values = true;
};

struct InductionResult {
  /// Indexed by stage when all values are kept; otherwise holds the last two.
  std::vector<ValueTable> values;
  /// Always indexed by stage 0..N.
  std::vector<PolicyTable> policies;
  /// Propagated points that fell outside the grid, per stage.
  std::vector<std::uint64_t> clamp_counts;
  double seconds = 0.0;

  const ValueTable& value_at(std::size_t stage) const;
};

struct NodeEvaluation {
  double value;
  std::uint32_t choice;
  std::uint64_t clamped;
};

/// max over inputs of stage_reward + J_{k+1}(propagate(node, u)) at one node.
/// `next_values` is empty at the terminal stage. Ties go to the lowest index.
NodeEvaluation evaluate_node(const DesignProblem& problem, const GridSpec& grid,
                             std::span<const double> next_values, std::size_t node);

InductionResult backward_induction(const DesignProblem& problem, const GridSpec& grid,
                                   const SolverOptions& options = {});

struct DesignResult {
  std::vector<Eigen::VectorXd> inputs;
  Trajectory trajectory;
  double objective = 0.0;
  GridSpec grid;
  double solve_seconds = 0.0;
  std::vector<std::uint64_t> clamp_counts;
  /// Rollout stages whose augmented state lay outside the grid.
  std::size_t grid_exits = 0;
};

/// Applies the stored policies from the initial augmented state using
/// nearest-node lookup, then recomputes the objective from the realized
/// trajectory.
DesignResult rollout(const DesignProblem& problem, const InductionResult& induction,
                     const GridSpec& grid);

DesignResult solve(const DesignProblem& problem, const GridSpec& grid,
                   const SolverOptions& options = {});

/// Grid bounds from the envelope of pilot trajectories: every constant-input
/// sequence plus `pilot_count` random ones. The envelope is widened by 50%
/// (25% per side), with a minimum width of 10% of the largest magnitude.
GridSpec auto_grid_bounds(const DesignProblem& problem, std::size_t pilot_count,
                          std::size_t points_per_axis = 100, std::uint64_t seed = 0);

}  // namespace oed
