#include "oed/cli.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "oed/oracle.hpp"
#include "oed/sensitivity.hpp"
#include "oed/table_io.hpp"

namespace oed::cli {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) parts.push_back(trim(item));
  if (!s.empty() && s.back() == sep) parts.emplace_back();
  return parts;
}

class LineContext {
 public:
  LineContext(std::size_t line, std::string key) : line_(line), key_(std::move(key)) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError(fmt::format("line {}: key '{}': {}", line_, key_, what));
  }

  double to_double(const std::string& text) const {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v)) {
      fail("expected a finite number, got '" + text + "'");
    }
    return v;
  }

  std::uint64_t to_unsigned(const std::string& text) const {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
      fail("expected a non-negative integer, got '" + text + "'");
    }
    return v;
  }

  std::vector<double> to_list(const std::string& text) const {
    std::vector<double> values;
    if (text.empty()) return values;
    for (const std::string& part : split(text, ',')) values.push_back(to_double(part));
    return values;
  }

  bool to_bool(const std::string& text) const {
    if (text == "true" || text == "1" || text == "yes") return true;
    if (text == "false" || text == "0" || text == "no") return false;
    fail("expected true or false, got '" + text + "'");
  }

  std::vector<GridAxis> to_grid(const std::string& text) const {
    std::vector<GridAxis> axes;
    for (const std::string& part : split(text, ',')) {
      const auto fields = split(part, ':');
      if (fields.size() != 3) fail("grid axes must be lo:hi:points, got '" + part + "'");
      const GridAxis ax{to_double(fields[0]), to_double(fields[1]),
                        static_cast<std::size_t>(to_unsigned(fields[2]))};
      if (!(ax.lo < ax.hi) || ax.points < 2) fail("grid axis needs lo < hi and points >= 2");
      axes.push_back(ax);
    }
    return axes;
  }

 private:
  std::size_t line_;
  std::string key_;
};

}  // namespace

RunConfig parse_config(std::istream& in) {
  RunConfig cfg;
  std::set<std::string> seen;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(fmt::format("line {}: expected 'key = value'", line_no));
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    const LineContext ctx(line_no, key);
    if (!seen.insert(key).second) ctx.fail("duplicate key");

    if (key == "model") {
      cfg.model = value;
    } else if (key == "theta0") {
      cfg.theta0 = ctx.to_list(value);
      if (cfg.theta0.empty()) ctx.fail("at least one parameter value is required");
    } else if (key == "horizon") {
      cfg.horizon = ctx.to_unsigned(value);
    } else if (key == "input_lo") {
      cfg.input_lo = ctx.to_double(value);
    } else if (key == "input_hi") {
      cfg.input_hi = ctx.to_double(value);
    } else if (key == "input_points") {
      cfg.input_points = ctx.to_unsigned(value);
      if (cfg.input_points < 1) ctx.fail("must be >= 1");
    } else if (key == "extra_inputs") {
      cfg.extra_inputs = ctx.to_list(value);
    } else if (key == "grid") {
      if (value == "auto") {
        cfg.grid.reset();
      } else {
        cfg.grid = ctx.to_grid(value);
      }
    } else if (key == "grid_points") {
      cfg.grid_points = ctx.to_unsigned(value);
      if (cfg.grid_points < 2) ctx.fail("must be >= 2");
    } else if (key == "pilot_count") {
      cfg.pilot_count = ctx.to_unsigned(value);
      if (cfg.pilot_count < 1) ctx.fail("must be >= 1");
    } else if (key == "seed") {
      cfg.seed = ctx.to_unsigned(value);
    } else if (key == "weights") {
      cfg.weights = ctx.to_list(value);
    } else if (key == "output_dir") {
      if (value.empty()) ctx.fail("must not be empty");
      cfg.output_dir = value;
    } else if (key == "workers") {
      cfg.workers = ctx.to_unsigned(value);
    } else if (key == "keep_all_values") {
      cfg.keep_all_values = ctx.to_bool(value);
    } else if (key == "export_tables") {
      cfg.export_tables = ctx.to_bool(value);
    } else if (key == "budget") {
      cfg.budget = ctx.to_unsigned(value);
    } else if (key == "mc_samples") {
      cfg.mc_samples = ctx.to_unsigned(value);
      if (cfg.mc_samples < 1) ctx.fail("must be >= 1");
    } else if (key == "mc_inputs") {
      cfg.mc_inputs = ctx.to_list(value);
      if (cfg.mc_inputs.empty()) ctx.fail("at least one input is required");
    } else if (key == "fd_sequences") {
      cfg.fd_sequences = ctx.to_unsigned(value);
    } else if (key == "fd_horizon") {
      cfg.fd_horizon = ctx.to_unsigned(value);
    } else if (key == "fd_step") {
      cfg.fd_step = ctx.to_double(value);
      if (!(cfg.fd_step > 0.0)) ctx.fail("must be positive");
    } else {
      ctx.fail("unknown key");
    }
  }
  if (!seen.contains("theta0")) throw ConfigError("missing required key 'theta0'");
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return parse_config(in);
}

Preset make_preset(const std::string& name) {
  if (name == "fly") {
    return {std::make_unique<FlyModel>(), std::make_unique<PoissonTrapModel>(), {"r", "K"}};
  }
  throw ConfigError("unknown model preset '" + name + "'");
}

std::vector<Eigen::VectorXd> read_inputs_csv(std::istream& in, std::size_t input_dim) {
  std::vector<Eigen::VectorXd> inputs;
  std::string line;
  std::size_t row = 0;
  bool header = true;
  while (std::getline(in, line)) {
    ++row;
    line = trim(line);
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (header) {
      header = false;
      if (fields.empty() || fields[0] != "t") throw ConfigError("inputs file: header must start with 't'");
      if (fields.size() != input_dim + 1) {
        throw ConfigError(fmt::format("inputs file: header has {} input columns, expected {}",
                                      fields.size() - 1, input_dim));
      }
      continue;
    }
    const LineContext ctx(row, "inputs");
    if (fields.size() != input_dim + 1) ctx.fail("wrong number of columns");
    if (ctx.to_unsigned(fields[0]) != inputs.size()) {
      ctx.fail(fmt::format("expected t = {}, got '{}'", inputs.size(), fields[0]));
    }
    Eigen::VectorXd u(static_cast<Eigen::Index>(input_dim));
    for (std::size_t k = 0; k < input_dim; ++k) u[static_cast<Eigen::Index>(k)] = ctx.to_double(fields[k + 1]);
    inputs.push_back(std::move(u));
  }
  if (inputs.empty()) throw ConfigError("inputs file: no rows");
  return inputs;
}

void write_inputs_csv(std::ostream& out, const std::vector<Eigen::VectorXd>& inputs) {
  out << "t";
  const Eigen::Index m = inputs.empty() ? 1 : inputs.front().size();
  if (m == 1) {
    out << ",u";
  } else {
    for (Eigen::Index k = 0; k < m; ++k) fmt::print(out, ",u{}", k);
  }
  out << '\n';
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    out << t;
    for (Eigen::Index k = 0; k < inputs[t].size(); ++k) fmt::print(out, ",{:.17g}", inputs[t][k]);
    out << '\n';
  }
}

void write_states_csv(std::ostream& out, const Trajectory& traj, const std::vector<std::string>& names) {
  if (traj.states.empty()) return;
  const Eigen::Index n = traj.states.front().x.size();
  const Eigen::Index p = traj.states.front().sensitivity.cols();
  out << "t";
  for (Eigen::Index i = 0; i < n; ++i) out << (n == 1 ? std::string(",x") : fmt::format(",x{}", i));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) {
      const std::string pname = static_cast<std::size_t>(j) < names.size() ? names[j] : fmt::format("p{}", j);
      out << (n == 1 ? fmt::format(",S_{}", pname) : fmt::format(",S{}_{}", i, pname));
    }
  }
  out << '\n';
  for (std::size_t t = 0; t < traj.states.size(); ++t) {
    const AugmentedState& st = traj.states[t];
    out << t;
    for (Eigen::Index i = 0; i < n; ++i) fmt::print(out, ",{:.17g}", st.x[i]);
    for (Eigen::Index k = 0; k < n * p; ++k) fmt::print(out, ",{:.17g}", st.sensitivity.data()[k]);
    out << '\n';
  }
}

namespace {

std::ofstream open_output(const RunConfig& cfg, const std::string& name) {
  std::filesystem::create_directories(cfg.output_dir);
  const auto path = cfg.output_dir / name;
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  return out;
}

ParameterVector make_theta(const RunConfig& cfg, const Preset& preset) {
  if (cfg.theta0.size() != preset.model->param_dim()) {
    throw ConfigError(fmt::format("key 'theta0': model '{}' has {} parameters, got {}", cfg.model,
                                  preset.model->param_dim(), cfg.theta0.size()));
  }
  if (!cfg.weights.empty() && cfg.weights.size() != preset.model->param_dim()) {
    throw ConfigError("key 'weights': one weight per parameter is required");
  }
  return ParameterVector(cfg.theta0, preset.param_names);
}

DesignProblem make_problem(const RunConfig& cfg, const Preset& preset, std::size_t horizon) {
  DesignProblem problem{*preset.model, *preset.obs, make_theta(cfg, preset),
                        InputGrid::uniform(cfg.input_lo, cfg.input_hi, cfg.input_points, cfg.extra_inputs),
                        horizon, cfg.weights};
  try {
    problem.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return problem;
}

GridSpec make_grid(const RunConfig& cfg, const DesignProblem& problem) {
  if (!cfg.grid) return auto_grid_bounds(problem, cfg.pilot_count, cfg.grid_points, cfg.seed);
  if (cfg.grid->size() != problem.augmented_dim()) {
    throw ConfigError(fmt::format("key 'grid': model '{}' needs {} axes, got {}", cfg.model,
                                  problem.augmented_dim(), cfg.grid->size()));
  }
  return GridSpec(*cfg.grid);
}

void write_grid_lines(std::ostream& out, const GridSpec& grid) {
  for (std::size_t a = 0; a < grid.dims(); ++a) {
    const GridAxis& ax = grid.axes()[a];
    fmt::print(out, "grid_axis{} = {:.17g}, {:.17g}, {}\n", a, ax.lo, ax.hi, ax.points);
  }
}

std::string join_counts(const std::vector<std::uint64_t>& counts) {
  std::string s;
  for (std::size_t i = 0; i < counts.size(); ++i) s += (i ? ", " : "") + std::to_string(counts[i]);
  return s;
}

template <class Fn>
int guarded(std::ostream& log, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const BudgetExceeded& e) {
    log << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const NumericError& e) {
    log << "numeric failure at " << e.what() << '\n';
    return kNumericFailure;
  } catch (const SimulationError& e) {
    log << "numeric failure at " << e.what() << '\n';
    return kNumericFailure;
  } catch (const std::invalid_argument& e) {
    log << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    log << "numeric failure: " << e.what() << '\n';
    return kNumericFailure;
  }
}

}  // namespace

int cmd_solve(const RunConfig& cfg, std::ostream& log) {
  return guarded(log, [&] {
    const Preset preset = make_preset(cfg.model);
    const DesignProblem problem = make_problem(cfg, preset, cfg.horizon);
    const GridSpec grid = make_grid(cfg, problem);

    const SolverOptions options{cfg.workers, cfg.keep_all_values || cfg.export_tables};
    const InductionResult induction = backward_induction(problem, grid, options);
    const DesignResult result = rollout(problem, induction, grid);

    {
      auto out = open_output(cfg, "inputs.csv");
      write_inputs_csv(out, result.inputs);
    }
    {
      auto out = open_output(cfg, "states.csv");
      write_states_csv(out, result.trajectory, preset.param_names);
    }
    {
      auto out = open_output(cfg, "summary.txt");
      fmt::print(out, "model = {}\n", cfg.model);
      fmt::print(out, "horizon = {}\n", cfg.horizon);
      fmt::print(out, "objective = {:.17g}\n", result.objective);
      fmt::print(out, "runtime_seconds = {:.3f}\n", result.solve_seconds);
      fmt::print(out, "input_candidates = {}\n", problem.inputs.size());
      fmt::print(out, "clamp_counts = {}\n", join_counts(result.clamp_counts));
      fmt::print(out, "grid_exits = {}\n", result.grid_exits);
      fmt::print(out, "clamped_steps = {}\n", result.trajectory.clamped_steps);
      write_grid_lines(out, grid);
    }
    if (cfg.export_tables) {
      for (std::size_t k = 0; k <= cfg.horizon; ++k) {
        write_value_table(cfg.output_dir / fmt::format("value_{}.bin", k), grid, induction.value_at(k));
        write_policy_table(cfg.output_dir / fmt::format("policy_{}.bin", k), grid, induction.policies[k],
                           problem.inputs);
        if (grid.node_count() <= 100'000) {
          auto v = open_output(cfg, fmt::format("value_{}.csv", k));
          write_value_table_csv(v, grid, induction.value_at(k));
          auto p = open_output(cfg, fmt::format("policy_{}.csv", k));
          write_policy_table_csv(p, grid, induction.policies[k], problem.inputs);
        }
      }
    }
    fmt::print(log, "objective = {:.17g}\n", result.objective);
    fmt::print(log, "runtime_seconds = {:.3f}\n", result.solve_seconds);
    for (std::size_t t = 0; t < result.inputs.size(); ++t) {
      fmt::print(log, "t={} u={:.6g} x={:.6g}\n", t, result.inputs[t][0], result.trajectory.states[t].x[0]);
    }
    return static_cast<int>(kOk);
  });
}

int cmd_evaluate(const RunConfig& cfg, const std::filesystem::path& inputs_file, std::ostream& log) {
  return guarded(log, [&] {
    const Preset preset = make_preset(cfg.model);
    const ParameterVector theta = make_theta(cfg, preset);
    std::ifstream in(inputs_file);
    if (!in) throw ConfigError("cannot open inputs file " + inputs_file.string());
    const auto inputs = read_inputs_csv(in, preset.model->input_dim());
    for (std::size_t t = 0; t < inputs.size(); ++t) {
      if (!preset.model->admissible_input({inputs[t].data(), static_cast<std::size_t>(inputs[t].size())})) {
        throw ConfigError(fmt::format("inputs file: input at t = {} is not admissible", t));
      }
    }

    const Trajectory traj = simulate(*preset.model, theta, inputs);
    const InformationMatrix info = total_fisher_information(*preset.obs, traj);
    const double trace = trace_objective(info, cfg.weights);

    {
      auto out = open_output(cfg, "information.csv");
      out << "row";
      for (const auto& name : preset.param_names) out << ',' << name;
      out << '\n';
      for (Eigen::Index i = 0; i < info.matrix.rows(); ++i) {
        out << preset.param_names[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < info.matrix.cols(); ++j) fmt::print(out, ",{:.17g}", info.matrix(i, j));
        out << '\n';
      }
    }
    {
      auto out = open_output(cfg, "evaluate_states.csv");
      write_states_csv(out, traj, preset.param_names);
    }
    {
      auto out = open_output(cfg, "evaluation.txt");
      fmt::print(out, "horizon = {}\n", traj.horizon());
      fmt::print(out, "objective = {:.17g}\n", trace);
      fmt::print(out, "clamped_steps = {}\n", traj.clamped_steps);
    }
    fmt::print(log, "objective = {:.17g}\n", trace);
    return static_cast<int>(kOk);
  });
}

namespace {

struct Check {
  std::string name;
  double value;
  double reference;
  double tolerance;
  bool pass;
};

int finish_checks(const RunConfig& cfg, const std::string& which, const std::vector<Check>& checks,
                  std::ostream& log) {
  auto out = open_output(cfg, which + "_report.csv");
  out << "check,value,reference,tolerance,pass\n";
  bool all = true;
  for (const Check& c : checks) {
    fmt::print(out, "{},{:.17g},{:.17g},{:.17g},{}\n", c.name, c.value, c.reference, c.tolerance,
               c.pass ? 1 : 0);
    if (!c.pass) {
      all = false;
      fmt::print(log, "FAILED {}: value {:.17g}, reference {:.17g}, tolerance {:.3g}\n", c.name, c.value,
                 c.reference, c.tolerance);
    }
  }
  fmt::print(log, "{}: {} checks, {}\n", which, checks.size(), all ? "all passed" : "FAILED");
  return all ? kOk : kVerificationFailure;
}

std::vector<Eigen::VectorXd> scalar_inputs(const std::vector<double>& values) {
  std::vector<Eigen::VectorXd> inputs;
  for (double v : values) inputs.push_back(Eigen::VectorXd::Constant(1, v));
  return inputs;
}

double relative_error(double value, double reference) {
  const double scale = std::max(std::abs(value), std::abs(reference));
  return scale == 0.0 ? 0.0 : std::abs(value - reference) / scale;
}

int verify_oracle(const RunConfig& cfg, std::ostream& log) {
  const Preset preset = make_preset(cfg.model);
  const DesignProblem problem = make_problem(cfg, preset, cfg.horizon);
  const auto count = sequence_count(problem.inputs.size(), problem.horizon);
  if (!count || *count > cfg.budget) {
    throw BudgetExceeded(count.value_or(std::numeric_limits<std::uint64_t>::max()), cfg.budget);
  }
  OracleReport report = exhaustive_search(problem, {cfg.budget, cfg.workers});
  const GridSpec grid = make_grid(cfg, problem);
  const DesignResult dp = solve(problem, grid, {cfg.workers, false});
  compare_with(report, dp.objective);
  {
    auto out = open_output(cfg, "oracle_best.csv");
    write_oracle_report_csv(out, report);
  }
  {
    auto out = open_output(cfg, "oracle_summary.txt");
    write_oracle_summary(out, report);
  }
  const double ratio = report.comparison->ratio;
  return finish_checks(cfg, "oracle",
                       {{"dp_over_exhaustive_ratio_min", ratio, 0.95, 0.0, ratio >= 0.95},
                        {"dp_over_exhaustive_ratio_max", ratio, 1.0, 1e-9, ratio <= 1.0 + 1e-9}},
                       log);
}

int verify_fd(const RunConfig& cfg, std::ostream& log) {
  const Preset preset = make_preset(cfg.model);
  const ParameterVector theta = make_theta(cfg, preset);
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> draw(cfg.input_lo, cfg.input_hi);
  std::vector<Check> checks;
  for (std::size_t s = 0; s < cfg.fd_sequences; ++s) {
    std::vector<double> values(cfg.fd_horizon + 1);
    for (double& v : values) v = draw(rng);
    const auto inputs = scalar_inputs(values);
    const Trajectory traj = simulate(*preset.model, theta, inputs);
    const auto fd = fd_sensitivity(*preset.model, theta, inputs, cfg.fd_step);
    double worst = 0.0;
    for (std::size_t t = 0; t < inputs.size(); ++t) {
      for (Eigen::Index k = 0; k < fd[t].size(); ++k) {
        worst = std::max(worst, relative_error(fd[t].data()[k], traj.states[t].sensitivity.data()[k]));
      }
    }
    checks.push_back({fmt::format("sequence_{}_max_relative_error", s), worst, 0.0, 1e-5, worst <= 1e-5});
  }
  return finish_checks(cfg, "fd", checks, log);
}

int verify_mc(const RunConfig& cfg, std::ostream& log) {
  const Preset preset = make_preset(cfg.model);
  const ParameterVector theta = make_theta(cfg, preset);
  const auto inputs = scalar_inputs(cfg.mc_inputs);
  const Trajectory traj = simulate(*preset.model, theta, inputs);
  const InformationMatrix analytic = total_fisher_information(*preset.obs, traj);
  const MonteCarloFisher mc =
      monte_carlo_fisher(*preset.model, *preset.obs, theta, inputs, cfg.mc_samples, cfg.seed, cfg.workers);
  std::vector<Check> checks;
  for (Eigen::Index i = 0; i < analytic.matrix.rows(); ++i) {
    for (Eigen::Index j = 0; j < analytic.matrix.cols(); ++j) {
      const double band = 3.0 * mc.standard_errors(i, j);
      checks.push_back({fmt::format("information_{}_{}", i, j), mc.estimate(i, j), analytic.matrix(i, j), band,
                        std::abs(mc.estimate(i, j) - analytic.matrix(i, j)) <= band});
    }
    const double band = 3.0 * mc.mean_score_errors[i];
    checks.push_back({fmt::format("mean_score_{}", i), mc.mean_score[i], 0.0, band,
                      std::abs(mc.mean_score[i]) <= band});
  }
  return finish_checks(cfg, "mc", checks, log);
}

int verify_poisson(const RunConfig& cfg, std::ostream& log) {
  std::vector<Check> checks;
  for (double lambda : {0.5, 1.0, 5.0, 320.0}) {
    const PoissonSeries series = poisson_info_series(lambda, 1000);
    const double scaled = series.value * lambda;
    checks.push_back({fmt::format("series_times_lambda_{:g}", lambda), scaled, 1.0, 1e-9,
                      series.tail_ok && std::abs(scaled - 1.0) <= 1e-9});
    const double closed = poisson_fisher_info(lambda);
    checks.push_back({fmt::format("closed_form_vs_series_{:g}", lambda), closed, series.value, 1e-9,
                      std::abs(closed * lambda - scaled) <= 1e-9});
  }
  checks.push_back({"trap_info_u0", trap_info(1000.0, 0.0), 0.0, 0.0, trap_info(1000.0, 0.0) == 0.0});
  checks.push_back({"trap_info_x0", trap_info(0.0, 0.5), 0.0, 0.0, trap_info(0.0, 0.5) == 0.0});
  return finish_checks(cfg, "poisson", checks, log);
}

}  // namespace

int cmd_verify(const RunConfig& cfg, const std::string& which, std::ostream& log) {
  return guarded(log, [&] {
    if (which == "oracle") return verify_oracle(cfg, log);
    if (which == "fd") return verify_fd(cfg, log);
    if (which == "mc") return verify_mc(cfg, log);
    if (which == "poisson") return verify_poisson(cfg, log);
    throw ConfigError("unknown verification '" + which + "' (expected oracle, fd, mc or poisson)");
  });
}

}  // namespace oed::cli
