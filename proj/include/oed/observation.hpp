#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace oed {

/// Poisson rates below this are treated as a point mass at zero.
inline constexpr double kDegenerateRate = 1e-12;

/// Per-time-step observation family p_x(y), possibly parametrized by the input.
///
/// info() returns the Fisher information of one observation about x (n x n,
/// row-major). score_x() is the gradient of log p_x(y) with respect to x.
class ObservationModel {
 public:
  virtual ~ObservationModel() = default;

  virtual std::string name() const = 0;
  virtual std::size_t state_dim() const = 0;
  virtual std::size_t observation_dim() const = 0;
  virtual bool input_dependent() const = 0;

  virtual void info(std::span<const double> x, std::span<const double> u,
                    std::span<double> out) const = 0;
  virtual void sample(std::span<const double> x, std::span<const double> u,
                      std::mt19937_64& rng, std::span<double> y) const = 0;
  virtual void score_x(std::span<const double> x, std::span<const double> u,
                       std::span<const double> y, std::span<double> out) const = 0;
};

/// 1 / lambda. Throws std::domain_error for lambda <= 0.
double poisson_fisher_info(double lambda);

/// Information about x carried by Y ~ Poisson(x u): u / x, or 0 when the rate
/// is degenerate.
double trap_info(double x, double u);

/// 1 / sd^2. Throws std::domain_error for sd <= 0.
double gaussian_fisher_info(double sd);

/// Y ~ Poisson(x u) with scalar state and input.
class PoissonTrapModel final : public ObservationModel {
 public:
  std::string name() const override { return "poisson_trap"; }
  std::size_t state_dim() const override { return 1; }
  std::size_t observation_dim() const override { return 1; }
  bool input_dependent() const override { return true; }

  void info(std::span<const double> x, std::span<const double> u,
            std::span<double> out) const override;
  void sample(std::span<const double> x, std::span<const double> u,
              std::mt19937_64& rng, std::span<double> y) const override;
  void score_x(std::span<const double> x, std::span<const double> u,
               std::span<const double> y, std::span<double> out) const override;
};

/// Y_i ~ Normal(x_i, sd_i^2), independent across channels. Ignores the input.
class GaussianModel final : public ObservationModel {
 public:
  explicit GaussianModel(std::vector<double> sd);

  std::string name() const override { return "gaussian"; }
  std::size_t state_dim() const override { return sd_.size(); }
  std::size_t observation_dim() const override { return sd_.size(); }
  bool input_dependent() const override { return false; }

  void info(std::span<const double> x, std::span<const double> u,
            std::span<double> out) const override;
  void sample(std::span<const double> x, std::span<const double> u,
              std::mt19937_64& rng, std::span<double> y) const override;
  void score_x(std::span<const double> x, std::span<const double> u,
               std::span<const double> y, std::span<double> out) const override;

 private:
  std::vector<double> sd_;
};

}  // namespace oed
