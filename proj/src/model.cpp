#include "oed/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace oed {

ParameterVector::ParameterVector(std::vector<double> values, std::vector<std::string> names)
    : values_(std::move(values)), names_(std::move(names)) {
  if (values_.empty()) {
    throw std::invalid_argument("ParameterVector: at least one parameter is required");
  }
  if (names_.empty()) {
    for (std::size_t i = 0; i < values_.size(); ++i) names_.push_back("theta" + std::to_string(i));
  }
  if (names_.size() != values_.size()) {
    throw std::invalid_argument("ParameterVector: names and values differ in length");
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw std::invalid_argument("ParameterVector: non-finite value");
  }
}

ParameterVector ParameterVector::with_value(std::size_t i, double value) const {
  ParameterVector copy = *this;
  copy.values_.at(i) = value;
  if (!std::isfinite(value)) throw std::invalid_argument("ParameterVector: non-finite value");
  return copy;
}

void SystemModel::jacobians(std::span<const double> x, std::span<const double> u,
                            const ParameterVector& theta, std::span<double> jac_x,
                            std::span<double> jac_theta) const {
  const std::size_t n = state_dim();
  const std::size_t p = param_dim();
  std::vector<double> probe(x.begin(), x.end());
  std::vector<double> plus(n), minus(n);

  for (std::size_t j = 0; j < n; ++j) {
    const double h = 1e-6 * std::max(1.0, std::abs(x[j]));
    probe[j] = x[j] + h;
    (void)step(probe, u, theta, plus);
    probe[j] = x[j] - h;
    (void)step(probe, u, theta, minus);
    probe[j] = x[j];
    for (std::size_t i = 0; i < n; ++i) jac_x[i * n + j] = (plus[i] - minus[i]) / (2 * h);
  }
  for (std::size_t j = 0; j < p; ++j) {
    const double h = 1e-6 * std::max(1.0, std::abs(theta[j]));
    (void)step(x, u, theta.with_value(j, theta[j] + h), plus);
    (void)step(x, u, theta.with_value(j, theta[j] - h), minus);
    for (std::size_t i = 0; i < n; ++i) jac_theta[i * p + j] = (plus[i] - minus[i]) / (2 * h);
  }
}

bool SystemModel::admissible_input(std::span<const double> u) const {
  return u.size() == input_dim() &&
         std::all_of(u.begin(), u.end(), [](double v) { return std::isfinite(v); });
}

namespace {

void check_fly_domain(double x, double u, double r, double K) {
  if (!(u >= 0.0 && u <= 1.0)) throw std::domain_error("fly model: trap fraction outside [0, 1]");
  if (!(x >= 0.0) || !std::isfinite(x)) throw std::domain_error("fly model: negative or non-finite population");
  if (!(r >= 0.0) || !(K > 0.0)) throw std::domain_error("fly model: requires r >= 0 and K > 0");
}

double fly_step_raw(double x, double u, double r, double K) {
  const double kept = x * (1.0 - u);
  return kept + r * kept * (K - kept);
}

}  // namespace

double fly_step(double x, double u, double r, double K) {
  check_fly_domain(x, u, r, K);
  return std::max(0.0, fly_step_raw(x, u, r, K));
}

FlyJacobians fly_jacobians(double x, double u, double r, double K) {
  check_fly_domain(x, u, r, K);
  const double kept = x * (1.0 - u);
  if (fly_step_raw(x, u, r, K) < 0.0) return {0.0, 0.0, 0.0};  // clamped branch is constant
  return {(1.0 - u) * (1.0 + r * (K - 2.0 * kept)), kept * (K - kept), r * kept};
}

ParameterVector FlyModel::nominal_parameters() { return ParameterVector({5e-4, 1000.0}, {"r", "K"}); }

StepStatus FlyModel::step(std::span<const double> x, std::span<const double> u,
                          const ParameterVector& theta, std::span<double> x_next) const {
  check_fly_domain(x[0], u[0], theta[0], theta[1]);
  const double raw = fly_step_raw(x[0], u[0], theta[0], theta[1]);
  if (raw < 0.0) {
    x_next[0] = 0.0;
    return StepStatus::kClamped;
  }
  x_next[0] = raw;
  return StepStatus::kOk;
}

void FlyModel::jacobians(std::span<const double> x, std::span<const double> u,
                         const ParameterVector& theta, std::span<double> jac_x,
                         std::span<double> jac_theta) const {
  const FlyJacobians j = fly_jacobians(x[0], u[0], theta[0], theta[1]);
  jac_x[0] = j.d_x;
  jac_theta[0] = j.d_r;
  jac_theta[1] = j.d_K;
}

Eigen::VectorXd FlyModel::initial_state(const ParameterVector& theta) const {
  Eigen::VectorXd x0(1);
  x0[0] = theta[1];
  return x0;
}

RowMatrix FlyModel::initial_sensitivity(const ParameterVector&) const {
  RowMatrix s0(1, 2);
  s0 << 0.0, 1.0;
  return s0;
}

bool FlyModel::admissible_input(std::span<const double> u) const {
  return u.size() == 1 && u[0] >= 0.0 && u[0] <= 1.0;
}

}  // namespace oed
