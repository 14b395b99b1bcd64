#include "oed/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "parallel.hpp"

namespace oed {

BudgetExceeded::BudgetExceeded(std::uint64_t required, std::uint64_t budget)
    : std::runtime_error(fmt::format("exhaustive search needs {} sequences, budget is {}", required, budget)),
      required_(required) {}

std::optional<std::uint64_t> sequence_count(std::size_t candidates, std::size_t horizon) {
  std::uint64_t total = 1;
  for (std::size_t t = 0; t <= horizon; ++t) {
    if (candidates != 0 && total > std::numeric_limits<std::uint64_t>::max() / candidates) {
      return std::nullopt;
    }
    total *= candidates;
  }
  return total;
}

namespace {

struct Best {
  double objective = -std::numeric_limits<double>::infinity();
  std::uint64_t index = 0;
};

}  // namespace

OracleReport exhaustive_search(const DesignProblem& problem, const ExhaustiveOptions& options) {
  problem.validate();
  const std::size_t q = problem.inputs.size();
  const std::size_t length = problem.horizon + 1;
  const auto count = sequence_count(q, problem.horizon);
  if (!count || *count > options.budget) {
    throw BudgetExceeded(count.value_or(std::numeric_limits<std::uint64_t>::max()), options.budget);
  }

  const std::size_t n = problem.model.state_dim();
  const std::size_t p = problem.model.param_dim();
  const std::size_t workers = detail::resolve_workers(options.workers);
  std::vector<Best> best(std::max<std::size_t>(1, std::min<std::uint64_t>(workers, *count)));

  const Eigen::VectorXd x0 = problem.model.initial_state(problem.theta);
  const RowMatrix s0 = problem.model.initial_sensitivity(problem.theta);

  // Same kernels as simulate() + total_fisher_information(), so objectives
  // match those routes bit for bit.
  detail::parallel_blocks(workers, *count, [&](std::size_t begin, std::size_t end, std::size_t w) {
    Workspace ws(n, p);
    InformationAccumulator acc(n, p);
    std::vector<std::size_t> digits(length);
    std::vector<double> x(n), s(n * p), xn(n), sn(n * p);
    for (std::uint64_t idx = begin; idx < end; ++idx) {
      std::uint64_t rest = idx;
      for (std::size_t t = length; t-- > 0;) {
        digits[t] = rest % q;
        rest /= q;
      }
      std::copy(x0.data(), x0.data() + n, x.begin());
      std::copy(s0.data(), s0.data() + n * p, s.begin());
      acc.reset();
      for (std::size_t t = 0; t < length; ++t) {
        const auto u = problem.inputs.candidate(digits[t]);
        acc.add_stage(problem.obs, x, s, u);
        if (t + 1 == length) break;
        (void)propagate_flat(problem.model, problem.theta, x, s, u, xn, sn, ws);
        x.swap(xn);
        s.swap(sn);
      }
      const double objective = acc.trace(problem.weights);
      if (objective > best[w].objective) best[w] = {objective, idx};
    }
  });

  Best overall;
  for (const Best& b : best) {
    if (b.objective > overall.objective) overall = b;
  }

  OracleReport report;
  report.best_objective = overall.objective;
  report.sequences_evaluated = *count;
  report.best_indices.resize(length);
  std::uint64_t rest = overall.index;
  for (std::size_t t = length; t-- > 0;) {
    report.best_indices[t] = rest % q;
    rest /= q;
  }
  for (std::size_t c : report.best_indices) report.best_inputs.push_back(problem.inputs.candidate_vector(c));
  return report;
}

void compare_with(OracleReport& report, double dp_objective) {
  const double ratio = report.best_objective > 0.0 ? dp_objective / report.best_objective : 1.0;
  report.comparison = OracleComparison{dp_objective, ratio};
}

std::vector<RowMatrix> fd_sensitivity(const SystemModel& model, const ParameterVector& theta,
                                      const std::vector<Eigen::VectorXd>& inputs, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("fd_sensitivity: step must be positive");
  const std::size_t n = model.state_dim();
  const std::size_t p = model.param_dim();
  std::vector<RowMatrix> result(inputs.size(), RowMatrix::Zero(n, p));
  for (std::size_t j = 0; j < p; ++j) {
    const double step = theta[j] == 0.0 ? h : h * std::abs(theta[j]);
    const Trajectory plus = simulate(model, theta.with_value(j, theta[j] + step), inputs);
    const Trajectory minus = simulate(model, theta.with_value(j, theta[j] - step), inputs);
    for (std::size_t t = 0; t < inputs.size(); ++t) {
      for (std::size_t i = 0; i < n; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        result[t](ii, static_cast<Eigen::Index>(j)) =
            (plus.states[t].x[ii] - minus.states[t].x[ii]) / (2.0 * step);
      }
    }
  }
  return result;
}

namespace {

constexpr std::uint64_t kChunkSize = 1 << 14;

struct ScoreMoments {
  explicit ScoreMoments(std::size_t p) : g(p, 0.0), g2(p, 0.0), outer(p * p, 0.0), outer2(p * p, 0.0) {}

  void merge(const ScoreMoments& o) {
    for (std::size_t i = 0; i < g.size(); ++i) {
      g[i] += o.g[i];
      g2[i] += o.g2[i];
    }
    for (std::size_t i = 0; i < outer.size(); ++i) {
      outer[i] += o.outer[i];
      outer2[i] += o.outer2[i];
    }
  }

  std::vector<double> g, g2, outer, outer2;
};

// Jackknife standard error of a sample mean, from its first two raw moments.
// For the mean, the delete-one jackknife reduces to sqrt(s^2 / n).
double jackknife_se(double sum, double sum_sq, double count) {
  if (count < 2) return 0.0;
  const double mean = sum / count;
  const double var = std::max(0.0, (sum_sq - count * mean * mean) / (count - 1));
  return std::sqrt(var / count);
}

}  // namespace

MonteCarloFisher monte_carlo_fisher(const SystemModel& model, const ObservationModel& obs,
                                    const ParameterVector& theta,
                                    const std::vector<Eigen::VectorXd>& inputs,
                                    std::uint64_t sample_count, std::uint64_t seed,
                                    std::size_t workers) {
  if (sample_count == 0) throw std::invalid_argument("monte_carlo_fisher: sample_count must be >= 1");
  const std::size_t n = model.state_dim();
  const std::size_t p = model.param_dim();
  const std::size_t m = obs.observation_dim();
  const Trajectory traj = simulate(model, theta, inputs);

  const std::uint64_t chunks = (sample_count + kChunkSize - 1) / kChunkSize;
  std::vector<ScoreMoments> per_chunk(chunks, ScoreMoments(p));

  detail::parallel_blocks(detail::resolve_workers(workers), chunks,
                          [&](std::size_t begin, std::size_t end, std::size_t) {
    std::vector<double> y(m), score_x(n), g(p);
    for (std::size_t c = begin; c < end; ++c) {
      std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                        static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(c >> 32)};
      std::mt19937_64 rng(seq);
      ScoreMoments& mom = per_chunk[c];
      const std::uint64_t first = c * kChunkSize;
      const std::uint64_t last = std::min(sample_count, first + kChunkSize);
      for (std::uint64_t sample = first; sample < last; ++sample) {
        std::fill(g.begin(), g.end(), 0.0);
        for (std::size_t t = 0; t < traj.states.size(); ++t) {
          const AugmentedState& st = traj.states[t];
          const std::span<const double> x(st.x.data(), n);
          const std::span<const double> u(traj.inputs[t].data(),
                                          static_cast<std::size_t>(traj.inputs[t].size()));
          obs.sample(x, u, rng, y);
          obs.score_x(x, u, y, score_x);
          for (std::size_t j = 0; j < p; ++j) {
            for (std::size_t i = 0; i < n; ++i) g[j] += st.sensitivity.data()[i * p + j] * score_x[i];
          }
        }
        for (std::size_t i = 0; i < p; ++i) {
          mom.g[i] += g[i];
          mom.g2[i] += g[i] * g[i];
          for (std::size_t j = 0; j < p; ++j) {
            const double v = g[i] * g[j];
            mom.outer[i * p + j] += v;
            mom.outer2[i * p + j] += v * v;
          }
        }
      }
    }
  });

  ScoreMoments total(p);
  for (const ScoreMoments& mom : per_chunk) total.merge(mom);

  const auto count = static_cast<double>(sample_count);
  const auto pp = static_cast<Eigen::Index>(p);
  MonteCarloFisher result{Eigen::MatrixXd(pp, pp), Eigen::MatrixXd(pp, pp), Eigen::VectorXd(pp),
                          Eigen::VectorXd(pp), sample_count, seed};
  for (std::size_t i = 0; i < p; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    result.mean_score[ii] = total.g[i] / count;
    result.mean_score_errors[ii] = jackknife_se(total.g[i], total.g2[i], count);
    for (std::size_t j = 0; j < p; ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      result.estimate(ii, jj) = total.outer[i * p + j] / count;
      result.standard_errors(ii, jj) = jackknife_se(total.outer[i * p + j], total.outer2[i * p + j], count);
    }
  }
  return result;
}

PoissonSeries poisson_info_series(double lambda, std::size_t truncation) {
  if (!(lambda > 0.0)) throw std::domain_error("poisson_info_series: rate must be positive");
  double value = 0.0;
  double mass = 0.0;
  const double log_lambda = std::log(lambda);
  for (std::size_t y = 0; y <= truncation; ++y) {
    const double yd = static_cast<double>(y);
    const double pmf = std::exp(yd * log_lambda - lambda - std::lgamma(yd + 1.0));
    const double z = yd / lambda - 1.0;
    value += pmf * z * z;
    mass += pmf;
  }
  const double tail = std::max(0.0, 1.0 - mass);
  return {value, tail, tail < 1e-12};
}

void write_oracle_report_csv(std::ostream& out, const OracleReport& report) {
  out << "t,candidate,u\n";
  for (std::size_t t = 0; t < report.best_inputs.size(); ++t) {
    const Eigen::VectorXd& u = report.best_inputs[t];
    for (Eigen::Index k = 0; k < u.size(); ++k) {
      fmt::print(out, "{},{},{:.17g}\n", t, report.best_indices[t], u[k]);
    }
  }
}

void write_oracle_summary(std::ostream& out, const OracleReport& report) {
  fmt::print(out, "sequences_evaluated = {}\n", report.sequences_evaluated);
  fmt::print(out, "best_objective = {:.17g}\n", report.best_objective);
  if (report.comparison) {
    fmt::print(out, "dp_objective = {:.17g}\n", report.comparison->dp_objective);
    fmt::print(out, "ratio = {:.17g}\n", report.comparison->ratio);
  }
}

}  // namespace oed
