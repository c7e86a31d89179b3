#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace fvl::flow {

// Dense per-pixel motion field (u, v) in pixels/frame. Interleaved row-major:
// data[2 * (y * width + x)] = u, data[2 * (y * width + x) + 1] = v.
// Pixel (x, y) has its center at (x + 0.5, y + 0.5).
struct FlowGrid {
  int width = 0;
  int height = 0;
  std::vector<double> data;

  FlowGrid() = default;
  FlowGrid(int w, int h);

  static FlowGrid constant(int w, int h, double u, double v);

  double u(int x, int y) const { return data[2 * (static_cast<std::size_t>(y) * width + x)]; }
  double v(int x, int y) const { return data[2 * (static_cast<std::size_t>(y) * width + x) + 1]; }
  void set(int x, int y, double u, double v);

  // Throws ValidationError on a bad length or non-finite value.
  void validate() const;

  bool operator==(const FlowGrid&) const = default;
};

// alpha * a + beta * b for grids of equal size.
FlowGrid combine(double alpha, const FlowGrid& a, double beta, const FlowGrid& b);

// "FFGR" | u32 width | u32 height | height * width (f32 u, f32 v), row-major,
// little-endian. Values are rounded to f32 on write.
void write_flow_grid(std::ostream& out, const FlowGrid& grid);
FlowGrid read_flow_grid(std::istream& in, const std::string& source = "<stream>");
void save_flow_grid(const std::filesystem::path& path, const FlowGrid& grid);
FlowGrid load_flow_grid(const std::filesystem::path& path);

}  // namespace fvl::flow
