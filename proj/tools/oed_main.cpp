#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "oed/cli.hpp"

namespace {

int with_config(const std::string& path, auto&& fn) {
  try {
    return fn(oed::cli::load_config(path));
  } catch (const oed::cli::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return oed::cli::kConfigError;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"T-optimal experiment design by dynamic programming"};
  app.require_subcommand(1);

  std::string config_path;
  std::string inputs_path;
  std::string which;

  auto* solve = app.add_subcommand("solve", "Compute the optimal input sequence");
  solve->add_option("config", config_path, "Run configuration")->required();

  auto* evaluate = app.add_subcommand("evaluate", "Fisher information of a fixed input sequence");
  evaluate->add_option("config", config_path, "Run configuration")->required();
  evaluate->add_option("inputs", inputs_path, "CSV with columns t,u")->required();

  auto* verify = app.add_subcommand("verify", "Run an independent verification");
  verify->add_option("config", config_path, "Run configuration")->required();
  verify->add_option("which", which, "oracle | fd | mc | poisson")
      ->required()
      ->check(CLI::IsMember({"oracle", "fd", "mc", "poisson"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : oed::cli::kConfigError;
  }

  if (*solve) {
    return with_config(config_path, [](const auto& cfg) { return oed::cli::cmd_solve(cfg, std::cout); });
  }
  if (*evaluate) {
    return with_config(config_path, [&](const auto& cfg) {
      return oed::cli::cmd_evaluate(cfg, inputs_path, std::cout);
    });
  }
  return with_config(config_path, [&](const auto& cfg) { return oed::cli::cmd_verify(cfg, which, std::cout); });
}
