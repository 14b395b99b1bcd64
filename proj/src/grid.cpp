#include "oed/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace oed {

GridSpec::GridSpec(std::vector<GridAxis> axes) : axes_(std::move(axes)) {
  if (axes_.empty()) throw std::invalid_argument("GridSpec: no axes");
  strides_.resize(axes_.size());
  spacing_.resize(axes_.size());
  for (std::size_t a = axes_.size(); a-- > 0;) {
    const GridAxis& ax = axes_[a];
    if (ax.points < 2) throw std::invalid_argument("GridSpec: every axis needs at least 2 points");
    if (!(ax.lo < ax.hi) || !std::isfinite(ax.lo) || !std::isfinite(ax.hi)) {
      throw std::invalid_argument("GridSpec: axis bounds must be finite with lo < hi");
    }
    strides_[a] = node_count_;
    spacing_[a] = (ax.hi - ax.lo) / static_cast<double>(ax.points - 1);
    node_count_ *= ax.points;
  }
}

double GridSpec::coordinate(std::size_t axis, std::size_t i) const {
  const GridAxis& ax = axes_[axis];
  if (i + 1 == ax.points) return ax.hi;
  return ax.lo + static_cast<double>(i) * spacing_[axis];
}

void GridSpec::node_point(std::size_t node, std::span<double> out) const {
  for (std::size_t a = 0; a < axes_.size(); ++a) {
    const std::size_t i = (node / strides_[a]) % axes_[a].points;
    out[a] = coordinate(a, i);
  }
}

std::size_t GridSpec::node_index(std::span<const std::size_t> indices) const {
  std::size_t node = 0;
  for (std::size_t a = 0; a < axes_.size(); ++a) node += indices[a] * strides_[a];
  return node;
}

bool GridSpec::contains(std::span<const double> point) const {
  for (std::size_t a = 0; a < axes_.size(); ++a) {
    if (!(point[a] >= axes_[a].lo && point[a] <= axes_[a].hi)) return false;
  }
  return true;
}

std::size_t GridSpec::nearest_node(std::span<const double> point) const {
  std::size_t node = 0;
  for (std::size_t a = 0; a < axes_.size(); ++a) {
    const GridAxis& ax = axes_[a];
    const double c = std::clamp(point[a], ax.lo, ax.hi);
    const double t = std::round((c - ax.lo) / spacing_[a]);
    const auto i = std::min(static_cast<std::size_t>(std::max(t, 0.0)), ax.points - 1);
    node += i * strides_[a];
  }
  return node;
}

bool GridSpec::operator==(const GridSpec& other) const {
  if (axes_.size() != other.axes_.size()) return false;
  for (std::size_t a = 0; a < axes_.size(); ++a) {
    const GridAxis& l = axes_[a];
    const GridAxis& r = other.axes_[a];
    if (l.lo != r.lo || l.hi != r.hi || l.points != r.points) return false;
  }
  return true;
}

namespace {

constexpr std::size_t kMaxInterpDims = 16;

}  // namespace

double interpolate(std::span<const double> values, const GridSpec& grid,
                   std::span<const double> point, bool* clamped) {
  const std::size_t dims = grid.dims();
  if (dims > kMaxInterpDims) throw std::invalid_argument("interpolate: too many dimensions");
  if (values.size() != grid.node_count()) throw std::invalid_argument("interpolate: table size mismatch");

  std::size_t base = 0;
  double frac[kMaxInterpDims];
  bool outside = false;
  for (std::size_t a = 0; a < dims; ++a) {
    const GridAxis& ax = grid.axes()[a];
    double c = point[a];
    if (c < ax.lo || c > ax.hi) {
      outside = true;
      c = std::clamp(c, ax.lo, ax.hi);
    }
    const double t = (c - ax.lo) / grid.spacing(a);
    // Snap to a node when the point coincides with one, so nodes reproduce
    // stored values bit-exactly.
    const double nearest = std::round(t);
    std::size_t i;
    double f;
    if (nearest >= 0.0 && nearest <= static_cast<double>(ax.points - 1) &&
        grid.coordinate(a, static_cast<std::size_t>(nearest)) == c) {
      i = static_cast<std::size_t>(nearest);
      f = 0.0;
      if (i == ax.points - 1) {
        i -= 1;
        f = 1.0;
      }
    } else {
      const double fl = std::floor(t);
      i = std::min(static_cast<std::size_t>(std::max(fl, 0.0)), ax.points - 2);
      f = std::clamp(t - static_cast<double>(i), 0.0, 1.0);
    }
    base += i * grid.stride(a);
    frac[a] = f;
  }
  if (clamped != nullptr) *clamped = outside;

  double result = 0.0;
  const std::size_t corners = std::size_t{1} << dims;
  for (std::size_t corner = 0; corner < corners; ++corner) {
    double w = 1.0;
    std::size_t node = base;
    for (std::size_t a = 0; a < dims; ++a) {
      if (corner & (std::size_t{1} << a)) {
        w *= frac[a];
        node += grid.stride(a);
      } else {
        w *= 1.0 - frac[a];
      }
      if (w == 0.0) break;
    }
    if (w != 0.0) result += w * values[node];
  }
  return result;
}

}  // namespace oed
