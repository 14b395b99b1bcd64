#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "oed/table_io.hpp"

namespace oed {
namespace {

TEST(TableIo, BinaryRoundTrip) {
  const GridSpec grid({{0, 1250, 4}, {-2.5e5, 1.4e6, 3}, {-0.3, 1.5, 2}});
  std::mt19937_64 rng(1);
  std::normal_distribution<double> d(0, 1e9);
  std::vector<double> values(grid.node_count());
  for (double& v : values) v = d(rng);

  std::stringstream buf;
  write_table_binary(buf, grid, 7, 1, values);
  const std::string bytes = buf.str();
  ASSERT_EQ(bytes.size(), 8u * (3 + 3 * 3 + values.size()));
  // dims = 3, little-endian.
  EXPECT_EQ(bytes[0], 3);
  EXPECT_EQ(bytes[1], 0);

  const TableFile back = read_table_binary(buf);
  EXPECT_TRUE(back.grid == grid);
  EXPECT_EQ(back.stage, 7u);
  EXPECT_EQ(back.components, 1u);
  EXPECT_EQ(back.values, values);
}

TEST(TableIo, TruncatedFileThrows) {
  const GridSpec grid({{0, 1, 2}});
  std::stringstream buf;
  write_table_binary(buf, grid, 0, 1, {1.0, 2.0});
  std::string bytes = buf.str();
  bytes.resize(bytes.size() - 3);
  std::stringstream cut(bytes);
  EXPECT_THROW(read_table_binary(cut), std::runtime_error);
  EXPECT_THROW(write_table_binary(buf, grid, 0, 1, {1.0}), std::invalid_argument);
}

TEST(TableIo, PolicyCsv) {
  const GridSpec grid({{0, 1, 2}});
  const InputGrid inputs(1, {0.25, 0.75});
  std::ostringstream out;
  write_policy_table_csv(out, grid, {0, {1, 0}}, inputs);
  EXPECT_EQ(out.str(), "axis0,candidate,u0\n0,1,0.75\n1,0,0.25\n");
  std::ostringstream vals;
  write_value_table_csv(vals, grid, {0, {0.5, 0.1}});
  EXPECT_EQ(vals.str(), "axis0,value\n0,0.5\n1,0.10000000000000001\n");
}

}  // namespace
}  // namespace oed
