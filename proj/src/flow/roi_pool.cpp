#include "fvl/flow/roi_pool.hpp"

#include <algorithm>
#include <cmath>

#include "fvl/common/error.hpp"

namespace fvl::flow {

BoundingBox expand_roi(const BoundingBox& box, double factor, int image_width, int image_height) {
  if (!(factor >= 1.0)) throw ValidationError("roi expansion factor must be >= 1");
  if (!(box.w > 0.0 && box.h > 0.0)) throw ValidationError("roi expansion needs a box with positive extent");
  if (image_width <= 0 || image_height <= 0) throw ValidationError("image size must be positive");
  const double half_w = 0.5 * box.w * factor;
  const double half_h = 0.5 * box.h * factor;
  const double x0 = std::max(box.cx - half_w, 0.0);
  const double x1 = std::min(box.cx + half_w, static_cast<double>(image_width));
  const double y0 = std::max(box.cy - half_h, 0.0);
  const double y1 = std::min(box.cy + half_h, static_cast<double>(image_height));
  if (!(x1 > x0 && y1 > y0)) throw ValidationError("box lies entirely outside the image");
  return BoundingBox::from_corners(x0, y0, x1, y1);
}

namespace {

// Channel 0 = u, 1 = v.
double bilinear(const FlowGrid& grid, double x, double y, int channel) {
  const double gx = std::clamp(x - 0.5, 0.0, static_cast<double>(grid.width - 1));
  const double gy = std::clamp(y - 0.5, 0.0, static_cast<double>(grid.height - 1));
  const int x0 = static_cast<int>(std::floor(gx));
  const int y0 = static_cast<int>(std::floor(gy));
  const int x1 = std::min(x0 + 1, grid.width - 1);
  const int y1 = std::min(y0 + 1, grid.height - 1);
  const double fx = gx - x0;
  const double fy = gy - y0;
  const auto at = [&](int px, int py) {
    return grid.data[2 * (static_cast<std::size_t>(py) * grid.width + px) + channel];
  };
  const double top = (1.0 - fx) * at(x0, y0) + fx * at(x1, y0);
  const double bottom = (1.0 - fx) * at(x0, y1) + fx * at(x1, y1);
  return (1.0 - fy) * top + fy * bottom;
}

}  // namespace

double sample_u(const FlowGrid& grid, double x, double y) { return bilinear(grid, x, y, 0); }
double sample_v(const FlowGrid& grid, double x, double y) { return bilinear(grid, x, y, 1); }

PooledFlow roi_pool(const FlowGrid& grid, const BoundingBox& roi, int n) {
  if (n < 1) throw ValidationError("pool size must be >= 1");
  if (!(roi.w > 0.0 && roi.h > 0.0)) throw ValidationError("empty ROI");
  if (grid.width <= 0 || grid.height <= 0) throw ValidationError("empty flow grid");
  PooledFlow out;
  out.grid_size = n;
  out.values.reserve(2 * static_cast<std::size_t>(n) * n);
  const double x0 = roi.left();
  const double y0 = roi.top();
  const double cell_w = roi.w / n;
  const double cell_h = roi.h / n;
  for (int row = 0; row < n; ++row) {
    const double y = y0 + (row + 0.5) * cell_h;
    for (int col = 0; col < n; ++col) {
      const double x = x0 + (col + 0.5) * cell_w;
      out.values.push_back(bilinear(grid, x, y, 0));
      out.values.push_back(bilinear(grid, x, y, 1));
    }
  }
  return out;
}

PooledFlow roi_pool_image(const FlowGrid& grid, const BoundingBox& roi, int n, const ImageSize& image) {
  if (image.width <= 0 || image.height <= 0) throw ValidationError("image size must be positive");
  const double sx = static_cast<double>(grid.width) / image.width;
  const double sy = static_cast<double>(grid.height) / image.height;
  return roi_pool(grid, {roi.cx * sx, roi.cy * sy, roi.w * sx, roi.h * sy}, n);
}

}  // namespace fvl::flow
