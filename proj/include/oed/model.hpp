#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace oed {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Unknown model parameters together with their names. Values must be finite.
class ParameterVector {
 public:
  ParameterVector(std::vector<double> values, std::vector<std::string> names);

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const { return values_; }
  const std::vector<std::string>& names() const { return names_; }

  /// Copy with entry i replaced, used for finite-difference perturbations.
  ParameterVector with_value(std::size_t i, double value) const;

 private:
  std::vector<double> values_;
  std::vector<std::string> names_;
};

enum class StepStatus { kOk, kClamped };

/// Discrete-time parametric system x' = f(x, u, theta).
///
/// Vectors are passed as spans. Matrices are row-major spans: jac_x is n x n
/// and jac_theta is n x p. Implementations must be pure so that a single model
/// can be shared across solver threads.
class SystemModel {
 public:
  virtual ~SystemModel() = default;

  virtual std::string name() const = 0;
  virtual std::size_t state_dim() const = 0;
  virtual std::size_t input_dim() const = 0;
  virtual std::size_t param_dim() const = 0;

  /// Writes f(x, u, theta) into x_next. Returns kClamped when the raw value
  /// left the model's state domain and was projected back onto it.
  virtual StepStatus step(std::span<const double> x, std::span<const double> u,
                          const ParameterVector& theta,
                          std::span<double> x_next) const = 0;

  /// Analytic models override this. The default is a central-difference
  /// approximation of step() and reports has_analytic_jacobians() == false.
  virtual void jacobians(std::span<const double> x, std::span<const double> u,
                         const ParameterVector& theta, std::span<double> jac_x,
                         std::span<double> jac_theta) const;
  virtual bool has_analytic_jacobians() const { return false; }

  virtual Eigen::VectorXd initial_state(const ParameterVector& theta) const = 0;
  /// d initial_state / d theta, n x p.
  virtual RowMatrix initial_sensitivity(const ParameterVector& theta) const = 0;

  virtual bool nonnegative_state() const { return false; }
  virtual bool admissible_input(std::span<const double> u) const;
};

// Fruit-fly trap model: logistic growth after a fraction u of the population
// is trapped. theta = (r, K), x0 = K.

/// x~ + r x~ (K - x~) with x~ = x (1 - u); negative results are clamped to 0.
double fly_step(double x, double u, double r, double K);

struct FlyJacobians {
  double d_x;
  double d_r;
  double d_K;
};

FlyJacobians fly_jacobians(double x, double u, double r, double K);

class FlyModel final : public SystemModel {
 public:
  static ParameterVector nominal_parameters();

  std::string name() const override { return "fly"; }
  std::size_t state_dim() const override { return 1; }
  std::size_t input_dim() const override { return 1; }
  std::size_t param_dim() const override { return 2; }

  StepStatus step(std::span<const double> x, std::span<const double> u,
                  const ParameterVector& theta,
                  std::span<double> x_next) const override;
  void jacobians(std::span<const double> x, std::span<const double> u,
                 const ParameterVector& theta, std::span<double> jac_x,
                 std::span<double> jac_theta) const override;
  bool has_analytic_jacobians() const override { return true; }

  Eigen::VectorXd initial_state(const ParameterVector& theta) const override;
  RowMatrix initial_sensitivity(const ParameterVector& theta) const override;

  bool nonnegative_state() const override { return true; }
  bool admissible_input(std::span<const double> u) const override;
};

}  // namespace oed
