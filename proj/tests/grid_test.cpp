#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "oed/grid.hpp"

namespace oed {
namespace {

// Tent-function oracle: sum over every node of value * prod max(0, 1 - |c - node| / h).
double tent_interpolate(const std::vector<double>& values, const GridSpec& grid, std::vector<double> point) {
  for (std::size_t a = 0; a < grid.dims(); ++a) {
    point[a] = std::clamp(point[a], grid.axes()[a].lo, grid.axes()[a].hi);
  }
  std::vector<double> node(grid.dims());
  double total = 0.0;
  for (std::size_t i = 0; i < grid.node_count(); ++i) {
    grid.node_point(i, node);
    double w = 1.0;
    for (std::size_t a = 0; a < grid.dims(); ++a) {
      w *= std::max(0.0, 1.0 - std::abs(point[a] - node[a]) / grid.spacing(a));
    }
    total += w * values[i];
  }
  return total;
}

TEST(GridSpec, Layout) {
  const GridSpec grid({{0, 1, 3}, {-2, 2, 5}});
  EXPECT_EQ(grid.node_count(), 15u);
  EXPECT_EQ(grid.stride(0), 5u);
  EXPECT_EQ(grid.stride(1), 1u);
  EXPECT_EQ(grid.coordinate(0, 1), 0.5);
  EXPECT_EQ(grid.coordinate(1, 4), 2.0);
  std::vector<double> p(2);
  grid.node_point(7, p);
  EXPECT_EQ(p[0], 0.5);
  EXPECT_EQ(p[1], 0.0);
  const std::size_t idx[] = {1, 2};
  EXPECT_EQ(grid.node_index(idx), 7u);
  const double near[] = {0.7, 0.4}, outside[] = {5.0, -9.0};
  EXPECT_EQ(grid.nearest_node(near), 7u);
  EXPECT_EQ(grid.nearest_node(outside), 10u);
  EXPECT_TRUE(grid.contains(near));
  EXPECT_FALSE(grid.contains(outside));
}

TEST(GridSpec, Validation) {
  EXPECT_THROW(GridSpec({}), std::invalid_argument);
  EXPECT_THROW(GridSpec({{0, 1, 1}}), std::invalid_argument);
  EXPECT_THROW(GridSpec({{1, 1, 4}}), std::invalid_argument);
  EXPECT_THROW(GridSpec({{0, INFINITY, 4}}), std::invalid_argument);
}

TEST(Interpolate, Examples) {
  const GridSpec line({{0, 1, 2}});
  const double half[] = {0.5};
  EXPECT_EQ(interpolate(std::vector<double>{0, 1}, line, half), 0.5);

  const GridSpec square({{0, 1, 2}, {0, 1, 2}});
  const double center[] = {0.5, 0.5};
  EXPECT_EQ(interpolate(std::vector<double>{0, 1, 2, 3}, square, center), 1.5);
}

TEST(Interpolate, ExactAtNodes) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> vals(-1e6, 1e6);
  const GridSpec grid({{0, 1250, 7}, {-278035.55846202309, 1390177.7923101154, 9}, {-0.3, 1.53, 5}});
  std::vector<double> values(grid.node_count());
  for (double& v : values) v = vals(rng);
  std::vector<double> p(3);
  for (std::size_t i = 0; i < grid.node_count(); ++i) {
    grid.node_point(i, p);
    bool clamped = true;
    EXPECT_EQ(interpolate(values, grid, p, &clamped), values[i]) << "node " << i;
    EXPECT_FALSE(clamped);
  }
}

TEST(Interpolate, MatchesTentOracle) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> vals(-10, 10), unit(-0.2, 1.2);
  const GridSpec grid({{0, 2, 4}, {-1, 1, 3}, {5, 6, 5}});
  std::vector<double> values(grid.node_count());
  for (double& v : values) v = vals(rng);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> p(3);
    for (std::size_t a = 0; a < 3; ++a) {
      const GridAxis& ax = grid.axes()[a];
      p[a] = ax.lo + unit(rng) * (ax.hi - ax.lo);
    }
    bool clamped = false;
    const double v = interpolate(values, grid, p, &clamped);
    EXPECT_NEAR(v, tent_interpolate(values, grid, p), 1e-12);
    EXPECT_EQ(clamped, !grid.contains(p));
  }
}

TEST(Interpolate, ReproducesAffineFunctions) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unit(0, 1);
  const GridSpec grid({{0, 3, 4}, {-2, 2, 6}});
  auto f = [](double a, double b) { return 2.5 * a - 0.75 * b + 4; };
  std::vector<double> values(grid.node_count()), p(2);
  for (std::size_t i = 0; i < grid.node_count(); ++i) {
    grid.node_point(i, p);
    values[i] = f(p[0], p[1]);
  }
  for (int trial = 0; trial < 200; ++trial) {
    p = {3 * unit(rng), -2 + 4 * unit(rng)};
    EXPECT_NEAR(interpolate(values, grid, p), f(p[0], p[1]), 1e-12);
  }
}

TEST(Interpolate, SizeMismatchThrows) {
  const GridSpec line({{0, 1, 3}});
  const double p[] = {0.5};
  EXPECT_THROW(interpolate(std::vector<double>{1, 2}, line, p), std::invalid_argument);
}

}  // namespace
}  // namespace oed
