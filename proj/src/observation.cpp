#include "oed/observation.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace oed {

double poisson_fisher_info(double lambda) {
  if (!(lambda > 0.0)) throw std::domain_error("poisson_fisher_info: rate must be positive");
  return 1.0 / lambda;
}

double trap_info(double x, double u) {
  if (!(x >= 0.0) || !std::isfinite(x)) throw std::domain_error("trap_info: population must be >= 0");
  if (!(u >= 0.0 && u <= 1.0)) throw std::domain_error("trap_info: trap fraction outside [0, 1]");
  if (u == 0.0 || x == 0.0 || x * u < kDegenerateRate) return 0.0;
  return u / x;
}

double gaussian_fisher_info(double sd) {
  if (!(sd > 0.0)) throw std::domain_error("gaussian_fisher_info: sd must be positive");
  return 1.0 / (sd * sd);
}

void PoissonTrapModel::info(std::span<const double> x, std::span<const double> u,
                            std::span<double> out) const {
  out[0] = trap_info(x[0], u[0]);
}

void PoissonTrapModel::sample(std::span<const double> x, std::span<const double> u,
                              std::mt19937_64& rng, std::span<double> y) const {
  const double rate = x[0] * u[0];
  if (rate < kDegenerateRate) {
    y[0] = 0.0;
    return;
  }
  std::poisson_distribution<long long> dist(rate);
  y[0] = static_cast<double>(dist(rng));
}

// d/dx [y log(xu) - xu] = y/x - u.
void PoissonTrapModel::score_x(std::span<const double> x, std::span<const double> u,
                               std::span<const double> y, std::span<double> out) const {
  if (x[0] * u[0] < kDegenerateRate) {
    out[0] = 0.0;
    return;
  }
  out[0] = y[0] / x[0] - u[0];
}

GaussianModel::GaussianModel(std::vector<double> sd) : sd_(std::move(sd)) {
  if (sd_.empty()) throw std::invalid_argument("GaussianModel: need at least one channel");
  for (double s : sd_) {
    if (!(s > 0.0) || !std::isfinite(s)) throw std::domain_error("GaussianModel: sd must be positive");
  }
}

void GaussianModel::info(std::span<const double>, std::span<const double>,
                         std::span<double> out) const {
  const std::size_t n = sd_.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] = i == j ? gaussian_fisher_info(sd_[i]) : 0.0;
  }
}

void GaussianModel::sample(std::span<const double> x, std::span<const double>,
                           std::mt19937_64& rng, std::span<double> y) const {
  for (std::size_t i = 0; i < sd_.size(); ++i) {
    std::normal_distribution<double> dist(x[i], sd_[i]);
    y[i] = dist(rng);
  }
}

void GaussianModel::score_x(std::span<const double> x, std::span<const double>,
                            std::span<const double> y, std::span<double> out) const {
  for (std::size_t i = 0; i < sd_.size(); ++i) out[i] = (y[i] - x[i]) / (sd_[i] * sd_[i]);
}

}  // namespace oed
