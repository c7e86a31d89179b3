#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "fvl/geometry/box.hpp"

namespace fvl::baselines {

// Least-squares polynomial per box coordinate (cx, cy, w, h) over frames
// t = 0..window-1. Coefficients are in powers of (t - center), which keeps
// the normal equations well conditioned.
struct PolyFit {
  int degree = 1;
  int window = 0;
  double center = 0.0;
  std::array<std::vector<double>, 4> coefficients;

  double evaluate(int coordinate, double t) const;
  BoundingBox evaluate(double t) const;
};

// Throws ValidationError unless degree is 1 or 2 and past.size() > degree.
PolyFit fit_poly(std::span<const BoundingBox> past, int degree);

// Fits over t = 0..tau-1 and evaluates at t = tau..tau+delta-1.
std::vector<BoundingBox> fit_extrapolate(std::span<const BoundingBox> past, int degree, int delta);

enum class Baseline { linear, const_accel };

int degree_of(Baseline baseline);
std::string name_of(Baseline baseline);
// "linear" or "constaccel"; throws ValidationError otherwise.
Baseline parse_baseline(const std::string& name);

inline std::vector<BoundingBox> extrapolate(Baseline baseline, std::span<const BoundingBox> past, int delta) {
  return fit_extrapolate(past, degree_of(baseline), delta);
}

}  // namespace fvl::baselines
