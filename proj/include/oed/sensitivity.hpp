#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "oed/model.hpp"
#include "oed/observation.hpp"

namespace oed {

/// State x paired with its parameter sensitivity S = d x / d theta (n x p).
struct AugmentedState {
  Eigen::VectorXd x;
  RowMatrix sensitivity;
};

/// States 0..N and the input applied at each of them. inputs[t] drives the
/// transition t -> t+1 and parametrizes the observation taken at t.
struct Trajectory {
  std::vector<AugmentedState> states;
  std::vector<Eigen::VectorXd> inputs;
  std::size_t clamped_steps = 0;

  std::size_t horizon() const { return states.empty() ? 0 : states.size() - 1; }
};

/// Symmetric p x p Fisher information about theta.
struct InformationMatrix {
  Eigen::MatrixXd matrix;

  double min_eigenvalue() const;
};

/// Raised by simulate() when a step fails; carries the index of the
/// offending transition.
class SimulationError : public std::runtime_error {
 public:
  SimulationError(std::size_t step, const std::string& what)
      : std::runtime_error("step " + std::to_string(step) + ": " + what), step_(step) {}
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

/// Scratch buffers for the allocation-free propagation and reward kernels.
/// One per thread.
class Workspace {
 public:
  Workspace(std::size_t n, std::size_t p)
      : jac_x(n * n), jac_theta(n * p), info(n * n), n_(n), p_(p) {}

  std::size_t state_dim() const { return n_; }
  std::size_t param_dim() const { return p_; }

  std::vector<double> jac_x;
  std::vector<double> jac_theta;
  std::vector<double> info;

 private:
  std::size_t n_;
  std::size_t p_;
};

/// Flat-buffer transition: x' = f(x, u, theta), S' = df/dtheta + df/dx * S.
/// S and s_next are n x p row-major.
StepStatus propagate_flat(const SystemModel& model, const ParameterVector& theta,
                          std::span<const double> x, std::span<const double> s,
                          std::span<const double> u, std::span<double> x_next,
                          std::span<double> s_next, Workspace& ws);

/// tr(W S^T I(x, u) S) with diagonal W (empty weights means identity).
double stage_reward_flat(const ObservationModel& obs, std::span<const double> x,
                         std::span<const double> s, std::span<const double> u,
                         std::span<const double> weights, Workspace& ws);

AugmentedState propagate(const SystemModel& model, const AugmentedState& state,
                         const Eigen::VectorXd& u, const ParameterVector& theta);

/// Initial augmented state followed by N transitions for inputs of length N+1.
Trajectory simulate(const SystemModel& model, const ParameterVector& theta,
                    const std::vector<Eigen::VectorXd>& inputs);

/// Sum of S_t^T I_t S_t in ascending t, symmetrized once at the end.
InformationMatrix total_fisher_information(const ObservationModel& obs, const Trajectory& traj);

double trace_objective(const InformationMatrix& info, std::span<const double> weights = {});

double stage_reward(const ObservationModel& obs, const AugmentedState& state,
                    const Eigen::VectorXd& u, std::span<const double> weights = {});

/// Accumulates S^T I S stage by stage. Shared by total_fisher_information and
/// the enumeration oracle so both produce identical bits.
class InformationAccumulator {
 public:
  explicit InformationAccumulator(std::size_t n, std::size_t p);

  void add_stage(const ObservationModel& obs, std::span<const double> x,
                 std::span<const double> s, std::span<const double> u);
  void reset();

  InformationMatrix result() const;
  /// Same as trace_objective(result(), weights) without allocating.
  double trace(std::span<const double> weights = {}) const;

 private:
  std::size_t n_;
  std::size_t p_;
  std::vector<double> sum_;
  std::vector<double> info_;
};

}  // namespace oed
