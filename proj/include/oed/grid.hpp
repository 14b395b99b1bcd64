#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace oed {

struct GridAxis {
  double lo;
  double hi;
  std::size_t points;
};

/// Uniform rectangular grid. Nodes are numbered row-major: the last axis
/// varies fastest.
class GridSpec {
 public:
  explicit GridSpec(std::vector<GridAxis> axes);

  std::size_t dims() const { return axes_.size(); }
  std::size_t node_count() const { return node_count_; }
  const std::vector<GridAxis>& axes() const { return axes_; }
  std::size_t stride(std::size_t axis) const { return strides_[axis]; }
  double spacing(std::size_t axis) const { return spacing_[axis]; }

  /// Coordinate of node i on an axis. The last node is exactly hi.
  double coordinate(std::size_t axis, std::size_t i) const;
  void node_point(std::size_t node, std::span<double> out) const;
  std::size_t node_index(std::span<const std::size_t> indices) const;

  bool contains(std::span<const double> point) const;
  /// Nearest node after clamping the point onto the grid box.
  std::size_t nearest_node(std::span<const double> point) const;

  bool operator==(const GridSpec& other) const;

 private:
  std::vector<GridAxis> axes_;
  std::vector<std::size_t> strides_;
  std::vector<double> spacing_;
  std::size_t node_count_ = 1;
};

/// J_k sampled on grid nodes.
struct ValueTable {
  std::size_t stage = 0;
  std::vector<double> values;
};

/// Index into the InputGrid of the maximizing input at each node.
struct PolicyTable {
  std::size_t stage = 0;
  std::vector<std::uint32_t> choice;
};

/// Multilinear interpolation over the 2^dims enclosing nodes. Points outside
/// the grid are clamped onto its boundary first; `clamped` (if non-null) is set
/// when that happened. Exact at nodes.
double interpolate(std::span<const double> values, const GridSpec& grid,
                   std::span<const double> point, bool* clamped = nullptr);

inline double interpolate(const ValueTable& table, const GridSpec& grid,
                          std::span<const double> point) {
  return interpolate(table.values, grid, point);
}

}  // namespace oed
