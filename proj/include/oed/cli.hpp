#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "oed/dp_solver.hpp"
#include "oed/grid.hpp"
#include "oed/model.hpp"
#include "oed/observation.hpp"

namespace oed::cli {

enum ExitCode : int {
  kOk = 0,
  kConfigError = 1,
  kNumericFailure = 2,
  kVerificationFailure = 3,
};

/// Settings for one run. Parsed from a `key = value` file; list values are
/// comma-separated and `#` starts a comment.
struct RunConfig {
  std::string model = "fly";
  std::vector<double> theta0;
  std::size_t horizon = 10;
  double input_lo = 0.0;
  double input_hi = 0.99;
  std::size_t input_points = 100;
  std::vector<double> extra_inputs = {0.9795};
  /// nullopt means "auto".
  std::optional<std::vector<GridAxis>> grid;
  std::size_t grid_points = 100;
  std::size_t pilot_count = 100;
  std::uint64_t seed = 1;
  std::vector<double> weights;
  std::filesystem::path output_dir = ".";
  std::size_t workers = 0;
  bool keep_all_values = true;
  bool export_tables = false;

  // verify settings
  std::uint64_t budget = 10'000'000;
  std::uint64_t mc_samples = 1'000'000;
  std::vector<double> mc_inputs = {0.5, 0.3, 0.2, 0.1};
  std::size_t fd_sequences = 50;
  std::size_t fd_horizon = 20;
  double fd_step = 1e-6;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::filesystem::path& path);

/// Model + observation pair for a named preset.
struct Preset {
  std::unique_ptr<SystemModel> model;
  std::unique_ptr<ObservationModel> obs;
  std::vector<std::string> param_names;
};

Preset make_preset(const std::string& name);

/// Reads a `t,u...` CSV with rows t = 0..N in order.
std::vector<Eigen::VectorXd> read_inputs_csv(std::istream& in, std::size_t input_dim);

void write_inputs_csv(std::ostream& out, const std::vector<Eigen::VectorXd>& inputs);
void write_states_csv(std::ostream& out, const Trajectory& traj,
                      const std::vector<std::string>& param_names);

int cmd_solve(const RunConfig& config, std::ostream& log);
int cmd_evaluate(const RunConfig& config, const std::filesystem::path& inputs_file, std::ostream& log);
/// which is one of oracle, fd, mc, poisson.
int cmd_verify(const RunConfig& config, const std::string& which, std::ostream& log);

}  // namespace oed::cli
