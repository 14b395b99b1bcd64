#include "oed/table_io.hpp"

#include <array>
#include <bit>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>
#include <fmt/ostream.h>

namespace oed {

namespace {

void put_u64(std::ostream& out, std::uint64_t v) {
  std::array<char, 8> bytes;
  for (std::size_t i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(bytes.data(), bytes.size());
}

void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

std::uint64_t get_u64(std::istream& in) {
  std::array<unsigned char, 8> bytes;
  in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  if (!in) throw std::runtime_error("table file truncated");
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return v;
}

double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }

std::ofstream open_binary(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  return out;
}

}  // namespace

void write_table_binary(std::ostream& out, const GridSpec& grid, std::uint64_t stage,
                        std::uint64_t components, const std::vector<double>& values) {
  if (values.size() != grid.node_count() * components) {
    throw std::invalid_argument("write_table_binary: value count does not match grid");
  }
  put_u64(out, grid.dims());
  put_u64(out, components);
  put_u64(out, stage);
  for (const GridAxis& ax : grid.axes()) {
    put_f64(out, ax.lo);
    put_f64(out, ax.hi);
    put_u64(out, ax.points);
  }
  for (double v : values) put_f64(out, v);
}

TableFile read_table_binary(std::istream& in) {
  const std::uint64_t dims = get_u64(in);
  const std::uint64_t components = get_u64(in);
  const std::uint64_t stage = get_u64(in);
  if (dims == 0 || dims > 64 || components == 0) throw std::runtime_error("table file: bad header");
  std::vector<GridAxis> axes;
  for (std::uint64_t a = 0; a < dims; ++a) {
    const double lo = get_f64(in);
    const double hi = get_f64(in);
    axes.push_back({lo, hi, static_cast<std::size_t>(get_u64(in))});
  }
  GridSpec grid(std::move(axes));
  std::vector<double> values(grid.node_count() * components);
  for (double& v : values) v = get_f64(in);
  return {std::move(grid), stage, components, std::move(values)};
}

void write_value_table(const std::filesystem::path& path, const GridSpec& grid, const ValueTable& table) {
  auto out = open_binary(path);
  write_table_binary(out, grid, table.stage, 1, table.values);
}

void write_policy_table(const std::filesystem::path& path, const GridSpec& grid,
                        const PolicyTable& policy, const InputGrid& inputs) {
  const std::size_t m = inputs.input_dim();
  std::vector<double> values;
  values.reserve(policy.choice.size() * m);
  for (std::uint32_t c : policy.choice) {
    const auto u = inputs.candidate(c);
    values.insert(values.end(), u.begin(), u.end());
  }
  auto out = open_binary(path);
  write_table_binary(out, grid, policy.stage, m, values);
}

void write_value_table_csv(std::ostream& out, const GridSpec& grid, const ValueTable& table) {
  for (std::size_t a = 0; a < grid.dims(); ++a) fmt::print(out, "axis{},", a);
  out << "value\n";
  std::vector<double> point(grid.dims());
  for (std::size_t node = 0; node < grid.node_count(); ++node) {
    grid.node_point(node, point);
    for (double c : point) fmt::print(out, "{:.17g},", c);
    fmt::print(out, "{:.17g}\n", table.values[node]);
  }
}

void write_policy_table_csv(std::ostream& out, const GridSpec& grid, const PolicyTable& policy,
                            const InputGrid& inputs) {
  for (std::size_t a = 0; a < grid.dims(); ++a) fmt::print(out, "axis{},", a);
  out << "candidate";
  for (std::size_t k = 0; k < inputs.input_dim(); ++k) fmt::print(out, ",u{}", k);
  out << '\n';
  std::vector<double> point(grid.dims());
  for (std::size_t node = 0; node < grid.node_count(); ++node) {
    grid.node_point(node, point);
    for (double c : point) fmt::print(out, "{:.17g},", c);
    fmt::print(out, "{}", policy.choice[node]);
    for (double u : inputs.candidate(policy.choice[node])) fmt::print(out, ",{:.17g}", u);
    out << '\n';
  }
}

}  // namespace oed
