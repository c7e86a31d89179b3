#pragma once

#include <array>

namespace fvl {

// Axis-aligned box in image pixels, parameterized by center and size.
struct BoundingBox {
  double cx = 0.0;
  double cy = 0.0;
  double w = 0.0;
  double h = 0.0;

  double left() const { return cx - 0.5 * w; }
  double right() const { return cx + 0.5 * w; }
  double top() const { return cy - 0.5 * h; }
  double bottom() const { return cy + 0.5 * h; }
  double area() const { return w * h; }

  static BoundingBox from_corners(double x0, double y0, double x1, double y1) {
    return {0.5 * (x0 + x1), 0.5 * (y0 + y1), x1 - x0, y1 - y0};
  }

  std::array<double, 4> as_array() const { return {cx, cy, w, h}; }
  static BoundingBox from_array(const std::array<double, 4>& a) { return {a[0], a[1], a[2], a[3]}; }

  bool operator==(const BoundingBox&) const = default;
};

// Same box with cx, w divided by image width and cy, h by image height.
struct NormalizedBox {
  double cx = 0.0;
  double cy = 0.0;
  double w = 0.0;
  double h = 0.0;

  std::array<double, 4> as_array() const { return {cx, cy, w, h}; }
  static NormalizedBox from_array(const std::array<double, 4>& a) { return {a[0], a[1], a[2], a[3]}; }

  bool operator==(const NormalizedBox&) const = default;
};

struct ImageSize {
  int width = 1280;
  int height = 640;
  bool operator==(const ImageSize&) const = default;
};

}  // namespace fvl
