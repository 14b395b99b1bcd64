#include "oed/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <exception>

namespace oed {

double InformationMatrix::min_eigenvalue() const {
  if (matrix.size() == 0) return 0.0;
  if (matrix.rows() == 2) {
    // Closed form: lambda_min = det / lambda_max with a Kahan determinant, accurate to a few
    // ulps of lambda_min even when the entries differ by many orders of magnitude.
    const double a = matrix(0, 0), b = 0.5 * (matrix(0, 1) + matrix(1, 0)), c = matrix(1, 1);
    const double bb = b * b;
    const double det = std::fma(a, c, -bb) - std::fma(b, b, -bb);
    const double half_diff = 0.5 * (a - c);
    const double radius = std::hypot(half_diff, b);
    const double mean = 0.5 * (a + c);
    if (mean >= 0.0) {
      const double lambda_max = mean + radius;
      return lambda_max == 0.0 ? 0.0 : det / lambda_max;
    }
    return mean - radius;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(matrix, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

StepStatus propagate_flat(const SystemModel& model, const ParameterVector& theta,
                          std::span<const double> x, std::span<const double> s,
                          std::span<const double> u, std::span<double> x_next,
                          std::span<double> s_next, Workspace& ws) {
  const std::size_t n = ws.state_dim();
  const std::size_t p = ws.param_dim();
  const StepStatus status = model.step(x, u, theta, x_next);
  model.jacobians(x, u, theta, ws.jac_x, ws.jac_theta);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      double acc = ws.jac_theta[i * p + j];
      for (std::size_t k = 0; k < n; ++k) acc += ws.jac_x[i * n + k] * s[k * p + j];
      s_next[i * p + j] = acc;
    }
  }
  return status;
}

namespace {

// (S^T I S)_{ij} for row-major S (n x p) and I (n x n).
double quadratic_entry(std::span<const double> s, std::span<const double> info, std::size_t n,
                       std::size_t p, std::size_t i, std::size_t j) {
  double total = 0.0;
  for (std::size_t a = 0; a < n; ++a) {
    double row = 0.0;
    for (std::size_t b = 0; b < n; ++b) row += info[a * n + b] * s[b * p + j];
    total += s[a * p + i] * row;
  }
  return total;
}

}  // namespace

double stage_reward_flat(const ObservationModel& obs, std::span<const double> x,
                         std::span<const double> s, std::span<const double> u,
                         std::span<const double> weights, Workspace& ws) {
  const std::size_t n = ws.state_dim();
  const std::size_t p = ws.param_dim();
  obs.info(x, u, ws.info);
  double reward = 0.0;
  for (std::size_t i = 0; i < p; ++i) {
    const double d = quadratic_entry(s, ws.info, n, p, i, i);
    reward += weights.empty() ? d : weights[i] * d;
  }
  return reward;
}

AugmentedState propagate(const SystemModel& model, const AugmentedState& state,
                         const Eigen::VectorXd& u, const ParameterVector& theta) {
  const std::size_t n = model.state_dim();
  const std::size_t p = model.param_dim();
  if (static_cast<std::size_t>(state.x.size()) != n ||
      static_cast<std::size_t>(state.sensitivity.rows()) != n ||
      static_cast<std::size_t>(state.sensitivity.cols()) != p ||
      static_cast<std::size_t>(u.size()) != model.input_dim() || theta.size() != p) {
    throw std::invalid_argument("propagate: dimension mismatch");
  }
  Workspace ws(n, p);
  AugmentedState next{Eigen::VectorXd(n), RowMatrix(n, p)};
  (void)propagate_flat(model, theta, {state.x.data(), n}, {state.sensitivity.data(), n * p},
                       {u.data(), static_cast<std::size_t>(u.size())}, {next.x.data(), n},
                       {next.sensitivity.data(), n * p}, ws);
  return next;
}

Trajectory simulate(const SystemModel& model, const ParameterVector& theta,
                    const std::vector<Eigen::VectorXd>& inputs) {
  const std::size_t n = model.state_dim();
  const std::size_t p = model.param_dim();
  if (inputs.empty()) throw std::invalid_argument("simulate: need at least one input (N >= 0)");
  if (theta.size() != p) throw std::invalid_argument("simulate: parameter dimension mismatch");

  Trajectory traj;
  traj.inputs = inputs;
  traj.states.reserve(inputs.size());
  traj.states.push_back({model.initial_state(theta), model.initial_sensitivity(theta)});

  Workspace ws(n, p);
  for (std::size_t t = 0; t + 1 < inputs.size(); ++t) {
    const AugmentedState& cur = traj.states.back();
    const Eigen::VectorXd& u = inputs[t];
    if (static_cast<std::size_t>(u.size()) != model.input_dim()) {
      throw SimulationError(t, "input dimension mismatch");
    }
    AugmentedState next{Eigen::VectorXd(n), RowMatrix(n, p)};
    StepStatus status;
    try {
      status = propagate_flat(model, theta, {cur.x.data(), n}, {cur.sensitivity.data(), n * p},
                              {u.data(), static_cast<std::size_t>(u.size())},
                              {next.x.data(), n}, {next.sensitivity.data(), n * p}, ws);
    } catch (const std::exception& e) {
      throw SimulationError(t, e.what());
    }
    if (!next.x.allFinite() || !next.sensitivity.allFinite()) {
      throw SimulationError(t, "non-finite augmented state");
    }
    if (status == StepStatus::kClamped) ++traj.clamped_steps;
    traj.states.push_back(std::move(next));
  }
  return traj;
}

InformationAccumulator::InformationAccumulator(std::size_t n, std::size_t p)
    : n_(n), p_(p), sum_(p * p, 0.0), info_(n * n) {}

void InformationAccumulator::add_stage(const ObservationModel& obs, std::span<const double> x,
                                       std::span<const double> s, std::span<const double> u) {
  obs.info(x, u, info_);
  for (std::size_t i = 0; i < p_; ++i) {
    for (std::size_t j = 0; j < p_; ++j) sum_[i * p_ + j] += quadratic_entry(s, info_, n_, p_, i, j);
  }
}

void InformationAccumulator::reset() { std::fill(sum_.begin(), sum_.end(), 0.0); }

InformationMatrix InformationAccumulator::result() const {
  Eigen::MatrixXd m(p_, p_);
  for (std::size_t i = 0; i < p_; ++i) {
    for (std::size_t j = 0; j < p_; ++j) m(i, j) = 0.5 * (sum_[i * p_ + j] + sum_[j * p_ + i]);
  }
  return {m};
}

double InformationAccumulator::trace(std::span<const double> weights) const {
  double total = 0.0;
  for (std::size_t i = 0; i < p_; ++i) {
    const double d = 0.5 * (sum_[i * p_ + i] + sum_[i * p_ + i]);
    total += weights.empty() ? d : weights[i] * d;
  }
  return total;
}

InformationMatrix total_fisher_information(const ObservationModel& obs, const Trajectory& traj) {
  if (traj.states.empty()) throw std::invalid_argument("total_fisher_information: empty trajectory");
  const std::size_t n = static_cast<std::size_t>(traj.states.front().x.size());
  const std::size_t p = static_cast<std::size_t>(traj.states.front().sensitivity.cols());
  if (obs.state_dim() != n || traj.inputs.size() != traj.states.size()) {
    throw std::invalid_argument("total_fisher_information: dimension mismatch");
  }
  InformationAccumulator acc(n, p);
  for (std::size_t t = 0; t < traj.states.size(); ++t) {
    const AugmentedState& st = traj.states[t];
    acc.add_stage(obs, {st.x.data(), n}, {st.sensitivity.data(), n * p},
                  {traj.inputs[t].data(), static_cast<std::size_t>(traj.inputs[t].size())});
  }
  return acc.result();
}

double trace_objective(const InformationMatrix& info, std::span<const double> weights) {
  const auto p = static_cast<std::size_t>(info.matrix.rows());
  if (!weights.empty() && weights.size() != p) {
    throw std::invalid_argument("trace_objective: weight count differs from parameter count");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < p; ++i) {
    const double d = info.matrix(i, i);
    total += weights.empty() ? d : weights[i] * d;
  }
  return total;
}

double stage_reward(const ObservationModel& obs, const AugmentedState& state,
                    const Eigen::VectorXd& u, std::span<const double> weights) {
  const auto n = static_cast<std::size_t>(state.x.size());
  const auto p = static_cast<std::size_t>(state.sensitivity.cols());
  if (!weights.empty() && weights.size() != p) {
    throw std::invalid_argument("stage_reward: weight count differs from parameter count");
  }
  Workspace ws(n, p);
  return stage_reward_flat(obs, {state.x.data(), n}, {state.sensitivity.data(), n * p},
                           {u.data(), static_cast<std::size_t>(u.size())}, weights, ws);
}

}  // namespace oed
