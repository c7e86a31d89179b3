#pragma once

#include <vector>

#include "fvl/flow/flow_grid.hpp"
#include "fvl/geometry/box.hpp"

namespace fvl::flow {

inline constexpr double kDefaultRoiExpand = 1.5;
inline constexpr int kDefaultPoolSize = 5;

// Fixed-length motion descriptor [u_1, v_1, ..., u_{n*n}, v_{n*n}], slots in
// row-major lattice order.
struct PooledFlow {
  int grid_size = 0;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  bool operator==(const PooledFlow&) const = default;
};

// Scales width and height by `factor` about the center, then clips to
// [0, image_width] x [0, image_height]. Throws ValidationError when
// factor < 1, the box has no extent, or nothing of it lies inside the image.
BoundingBox expand_roi(const BoundingBox& box, double factor, int image_width, int image_height);

// Bilinear sample at continuous grid coordinates, pixel centers at +0.5,
// coordinates clamped to the outermost pixel centers.
double sample_u(const FlowGrid& grid, double x, double y);
double sample_v(const FlowGrid& grid, double x, double y);

// Samples the centers of an n x n partition of `roi` (grid pixel units).
// Throws ValidationError for n < 1 or an ROI without positive extent.
PooledFlow roi_pool(const FlowGrid& grid, const BoundingBox& roi, int n);

// Same, with `roi` given in image pixels of a frame that the grid covers at
// a possibly lower resolution.
PooledFlow roi_pool_image(const FlowGrid& grid, const BoundingBox& roi, int n, const ImageSize& image);

}  // namespace fvl::flow
