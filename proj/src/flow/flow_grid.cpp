#include "fvl/flow/flow_grid.hpp"

#include <cmath>
#include <fstream>

#include "fvl/common/binary_io.hpp"
#include "fvl/common/error.hpp"

namespace fvl::flow {

FlowGrid::FlowGrid(int w, int h) : width(w), height(h) {
  if (w <= 0 || h <= 0) throw ValidationError("flow grid dimensions must be positive");
  data.assign(2 * static_cast<std::size_t>(w) * static_cast<std::size_t>(h), 0.0);
}

FlowGrid FlowGrid::constant(int w, int h, double u, double v) {
  FlowGrid grid(w, h);
  for (std::size_t i = 0; i < grid.data.size(); i += 2) {
    grid.data[i] = u;
    grid.data[i + 1] = v;
  }
  return grid;
}

void FlowGrid::set(int x, int y, double u_value, double v_value) {
  const std::size_t k = 2 * (static_cast<std::size_t>(y) * width + x);
  data[k] = u_value;
  data[k + 1] = v_value;
}

void FlowGrid::validate() const {
  if (width <= 0 || height <= 0) throw ValidationError("flow grid dimensions must be positive");
  if (data.size() != 2 * static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw ValidationError("flow grid data length does not equal width * height * 2");
  }
  for (double x : data) {
    if (!std::isfinite(x)) throw ValidationError("flow grid holds a non-finite value");
  }
}

FlowGrid combine(double alpha, const FlowGrid& a, double beta, const FlowGrid& b) {
  if (a.width != b.width || a.height != b.height) throw ValidationError("combine: grid sizes differ");
  FlowGrid out(a.width, a.height);
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] = alpha * a.data[i] + beta * b.data[i];
  return out;
}

void write_flow_grid(std::ostream& out, const FlowGrid& grid) {
  grid.validate();
  out.write("FFGR", 4);
  binary::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(grid.width));
  binary::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(grid.height));
  for (double x : grid.data) binary::write_f32(out, static_cast<float>(x));
}

FlowGrid read_flow_grid(std::istream& in, const std::string& source) {
  binary::Reader reader(in, source);
  reader.expect_magic("FFGR");
  const auto width = reader.read_le<std::uint32_t>("width");
  const auto height = reader.read_le<std::uint32_t>("height");
  if (width == 0 || height == 0 || width > (1u << 16) || height > (1u << 16)) {
    reader.fail("implausible grid shape " + std::to_string(width) + "x" + std::to_string(height));
  }
  FlowGrid grid(static_cast<int>(width), static_cast<int>(height));
  for (double& x : grid.data) {
    x = reader.read_f32("flow value");
    if (!std::isfinite(x)) reader.fail("non-finite flow value");
  }
  reader.expect_end();
  return grid;
}

void save_flow_grid(const std::filesystem::path& path, const FlowGrid& grid) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  write_flow_grid(out, grid);
}

FlowGrid load_flow_grid(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return read_flow_grid(in, path.string());
}

}  // namespace fvl::flow
