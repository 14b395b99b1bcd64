#include "oed/dp_solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <utility>

#include "parallel.hpp"

namespace oed {

InputGrid::InputGrid(std::size_t input_dim, std::vector<double> candidates)
    : input_dim_(input_dim), candidates_(std::move(candidates)) {
  if (input_dim_ == 0) throw std::invalid_argument("InputGrid: input dimension must be >= 1");
  if (candidates_.empty() || candidates_.size() % input_dim_ != 0) {
    throw std::invalid_argument("InputGrid: need a whole, non-zero number of candidates");
  }
  if (size() > std::numeric_limits<std::uint32_t>::max()) {
    throw std::invalid_argument("InputGrid: too many candidates");
  }
  for (double v : candidates_) {
    if (!std::isfinite(v)) throw std::invalid_argument("InputGrid: non-finite candidate");
  }
}

InputGrid InputGrid::uniform(double lo, double hi, std::size_t points, std::vector<double> extras) {
  if (points == 0) throw std::invalid_argument("InputGrid: input_points must be >= 1");
  if (points > 1 && !(lo <= hi)) throw std::invalid_argument("InputGrid: lo must not exceed hi");
  std::vector<double> values;
  values.reserve(points + extras.size());
  if (points == 1) {
    values.push_back(lo);
  } else {
    const double h = (hi - lo) / static_cast<double>(points - 1);
    for (std::size_t i = 0; i + 1 < points; ++i) values.push_back(lo + static_cast<double>(i) * h);
    values.push_back(hi);
  }
  values.insert(values.end(), extras.begin(), extras.end());
  return InputGrid(1, std::move(values));
}

Eigen::VectorXd InputGrid::candidate_vector(std::size_t i) const {
  const auto c = candidate(i);
  Eigen::VectorXd u(static_cast<Eigen::Index>(input_dim_));
  std::copy(c.begin(), c.end(), u.data());
  return u;
}

std::size_t DesignProblem::augmented_dim() const {
  return model.state_dim() * (1 + model.param_dim());
}

void DesignProblem::validate() const {
  if (obs.state_dim() != model.state_dim()) {
    throw std::invalid_argument("observation model state dimension differs from system model");
  }
  if (theta.size() != model.param_dim()) throw std::invalid_argument("parameter dimension mismatch");
  if (inputs.input_dim() != model.input_dim()) throw std::invalid_argument("input dimension mismatch");
  if (!weights.empty() && weights.size() != model.param_dim()) {
    throw std::invalid_argument("trace weight count differs from parameter count");
  }
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (!model.admissible_input(inputs.candidate(i))) {
      throw std::invalid_argument("input candidate " + std::to_string(i) + " is not admissible");
    }
  }
}

void DesignProblem::validate(const GridSpec& grid) const {
  validate();
  if (grid.dims() != augmented_dim()) {
    throw std::invalid_argument("grid has " + std::to_string(grid.dims()) + " axes, expected " +
                                std::to_string(augmented_dim()));
  }
}

const ValueTable& InductionResult::value_at(std::size_t stage) const {
  for (const ValueTable& t : values) {
    if (t.stage == stage) return t;
  }
  throw std::out_of_range("value table for stage " + std::to_string(stage) + " was not retained");
}

namespace {

struct NodeScratch {
  explicit NodeScratch(const DesignProblem& problem)
      : point(problem.augmented_dim()),
        next(problem.augmented_dim()),
        ws(problem.model.state_dim(), problem.model.param_dim()) {}

  std::vector<double> point;
  std::vector<double> next;
  Workspace ws;
};

NodeEvaluation evaluate_node_impl(const DesignProblem& problem, const GridSpec& grid,
                                  std::span<const double> next_values, std::size_t node,
                                  std::size_t stage, NodeScratch& scratch) {
  const std::size_t n = problem.model.state_dim();
  const std::size_t np = n * problem.model.param_dim();
  grid.node_point(node, scratch.point);
  const std::span<const double> x(scratch.point.data(), n);
  const std::span<const double> s(scratch.point.data() + n, np);
  const std::span<double> x_next(scratch.next.data(), n);
  const std::span<double> s_next(scratch.next.data() + n, np);

  NodeEvaluation best{-std::numeric_limits<double>::infinity(), 0, 0};
  for (std::size_t q = 0; q < problem.inputs.size(); ++q) {
    const auto u = problem.inputs.candidate(q);
    double value = stage_reward_flat(problem.obs, x, s, u, problem.weights, scratch.ws);
    if (!next_values.empty()) {
      (void)propagate_flat(problem.model, problem.theta, x, s, u, x_next, s_next, scratch.ws);
      for (double v : scratch.next) {
        if (!std::isfinite(v)) throw NumericError(stage, "non-finite propagated state");
      }
      bool clamped = false;
      value += interpolate(next_values, grid, scratch.next, &clamped);
      if (clamped) ++best.clamped;
    }
    if (!std::isfinite(value)) throw NumericError(stage, "non-finite value");
    if (value > best.value) {
      best.value = value;
      best.choice = static_cast<std::uint32_t>(q);
    }
  }
  return best;
}

}  // namespace

NodeEvaluation evaluate_node(const DesignProblem& problem, const GridSpec& grid,
                             std::span<const double> next_values, std::size_t node) {
  problem.validate(grid);
  NodeScratch scratch(problem);
  return evaluate_node_impl(problem, grid, next_values, node, 0, scratch);
}

InductionResult backward_induction(const DesignProblem& problem, const GridSpec& grid,
                                   const SolverOptions& options) {
  problem.validate(grid);
  const auto start = std::chrono::steady_clock::now();
  const std::size_t horizon = problem.horizon;
  const std::size_t nodes = grid.node_count();
  const std::size_t workers = detail::resolve_workers(options.workers);

  InductionResult result;
  result.policies.resize(horizon + 1);
  result.clamp_counts.assign(horizon + 1, 0);
  if (options.keep_all_values) result.values.resize(horizon + 1);

  ValueTable next;  // J_{k+1}
  for (std::size_t k = horizon + 1; k-- > 0;) {
    ValueTable current{k, std::vector<double>(nodes)};
    PolicyTable policy{k, std::vector<std::uint32_t>(nodes)};
    std::vector<std::uint64_t> clamps(workers, 0);
    const std::span<const double> next_values =
        k == horizon ? std::span<const double>{} : std::span<const double>(next.values);

    detail::parallel_blocks(workers, nodes, [&](std::size_t begin, std::size_t end, std::size_t w) {
      NodeScratch scratch(problem);
      for (std::size_t node = begin; node < end; ++node) {
        const NodeEvaluation e = evaluate_node_impl(problem, grid, next_values, node, k, scratch);
        current.values[node] = e.value;
        policy.choice[node] = e.choice;
        clamps[w] += e.clamped;
      }
    });

    for (std::uint64_t c : clamps) result.clamp_counts[k] += c;
    result.policies[k] = std::move(policy);
    if (options.keep_all_values) {
      result.values[k] = current;
    } else if (k == 0) {
      if (horizon > 0) result.values.push_back(std::move(next));
      result.values.insert(result.values.begin(), current);
    }
    next = std::move(current);
  }

  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

DesignResult rollout(const DesignProblem& problem, const InductionResult& induction,
                     const GridSpec& grid) {
  problem.validate(grid);
  if (induction.policies.size() != problem.horizon + 1) {
    throw std::invalid_argument("rollout: policy count does not match the horizon");
  }
  const std::size_t n = problem.model.state_dim();
  const std::size_t np = n * problem.model.param_dim();
  for (const PolicyTable& p : induction.policies) {
    if (p.choice.size() != grid.node_count()) throw std::invalid_argument("rollout: policy/grid mismatch");
  }

  DesignResult result{{}, {}, 0.0, grid, induction.seconds, induction.clamp_counts, 0};

  std::vector<double> point(n + np);
  std::vector<double> next(n + np);
  const Eigen::VectorXd x0 = problem.model.initial_state(problem.theta);
  const RowMatrix s0 = problem.model.initial_sensitivity(problem.theta);
  std::copy(x0.data(), x0.data() + n, point.begin());
  std::copy(s0.data(), s0.data() + np, point.begin() + static_cast<std::ptrdiff_t>(n));

  Workspace ws(n, problem.model.param_dim());
  for (std::size_t k = 0; k <= problem.horizon; ++k) {
    if (!grid.contains(point)) ++result.grid_exits;
    const std::uint32_t choice = induction.policies[k].choice[grid.nearest_node(point)];
    if (choice >= problem.inputs.size()) throw std::out_of_range("rollout: invalid policy index");
    result.inputs.push_back(problem.inputs.candidate_vector(choice));
    if (k == problem.horizon) break;
    (void)propagate_flat(problem.model, problem.theta, {point.data(), n}, {point.data() + n, np},
                         problem.inputs.candidate(choice), {next.data(), n}, {next.data() + n, np}, ws);
    point.swap(next);
  }

  result.trajectory = simulate(problem.model, problem.theta, result.inputs);
  result.objective = trace_objective(total_fisher_information(problem.obs, result.trajectory),
                                     problem.weights);
  return result;
}

DesignResult solve(const DesignProblem& problem, const GridSpec& grid, const SolverOptions& options) {
  const InductionResult induction = backward_induction(problem, grid, options);
  return rollout(problem, induction, grid);
}

GridSpec auto_grid_bounds(const DesignProblem& problem, std::size_t pilot_count,
                          std::size_t points_per_axis, std::uint64_t seed) {
  problem.validate();
  if (pilot_count == 0) throw std::invalid_argument("auto_grid_bounds: pilot_count must be >= 1");
  const std::size_t n = problem.model.state_dim();
  const std::size_t dims = problem.augmented_dim();
  const std::size_t q = problem.inputs.size();
  const std::size_t length = problem.horizon + 1;

  std::vector<double> lo(dims, std::numeric_limits<double>::infinity());
  std::vector<double> hi(dims, -std::numeric_limits<double>::infinity());
  auto absorb = [&](const std::vector<std::size_t>& choices) {
    std::vector<Eigen::VectorXd> seq;
    seq.reserve(length);
    for (std::size_t c : choices) seq.push_back(problem.inputs.candidate_vector(c));
    const Trajectory traj = simulate(problem.model, problem.theta, seq);
    for (const AugmentedState& st : traj.states) {
      for (std::size_t d = 0; d < dims; ++d) {
        const double v = d < n ? st.x[static_cast<Eigen::Index>(d)] : st.sensitivity.data()[d - n];
        lo[d] = std::min(lo[d], v);
        hi[d] = std::max(hi[d], v);
      }
    }
  };

  for (std::size_t c = 0; c < q; ++c) absorb(std::vector<std::size_t>(length, c));
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, q - 1);
  std::vector<std::size_t> choices(length);
  for (std::size_t i = 0; i < pilot_count; ++i) {
    for (auto& c : choices) c = pick(rng);
    absorb(choices);
  }

  std::vector<GridAxis> axes;
  axes.reserve(dims);
  for (std::size_t d = 0; d < dims; ++d) {
    double a = lo[d];
    double b = hi[d];
    double width = b - a;
    double min_width = 0.1 * std::max(std::abs(a), std::abs(b));
    if (min_width == 0.0) min_width = 1.0;
    if (width < min_width) {
      const double mid = 0.5 * (a + b);
      a = mid - 0.5 * min_width;
      b = mid + 0.5 * min_width;
      width = min_width;
    }
    a -= 0.25 * width;
    b += 0.25 * width;
    if (d < n && problem.model.nonnegative_state()) a = std::max(a, 0.0);
    axes.push_back({a, b, points_per_axis});
  }
  return GridSpec(std::move(axes));
}

}  // namespace oed
