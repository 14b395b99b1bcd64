#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "oed/dp_solver.hpp"
#include "oed/grid.hpp"

namespace oed {

// Flat binary layout, all fields little-endian:
//   u64 dims, u64 components, u64 stage,
//   dims x (f64 lo, f64 hi, u64 points),
//   node_count x components f64 values, row-major over nodes.
// Value tables have one component; policy tables store the chosen input
// vector (input_dim components).

struct TableFile {
  GridSpec grid;
  std::uint64_t stage;
  std::uint64_t components;
  std::vector<double> values;
};

void write_table_binary(std::ostream& out, const GridSpec& grid, std::uint64_t stage,
                        std::uint64_t components, const std::vector<double>& values);
TableFile read_table_binary(std::istream& in);

void write_value_table(const std::filesystem::path& path, const GridSpec& grid, const ValueTable& table);
void write_policy_table(const std::filesystem::path& path, const GridSpec& grid,
                        const PolicyTable& policy, const InputGrid& inputs);

/// One row per node: axis coordinates followed by the value.
void write_value_table_csv(std::ostream& out, const GridSpec& grid, const ValueTable& table);
/// One row per node: axis coordinates, candidate index, input components.
void write_policy_table_csv(std::ostream& out, const GridSpec& grid, const PolicyTable& policy,
                            const InputGrid& inputs);

}  // namespace oed
