#include "fvl/baselines/extrapolate.hpp"

#include <cmath>
#include <utility>

#include "fvl/common/error.hpp"

namespace fvl::baselines {

namespace {

// Solves the (degree+1)^2 normal equations by Gaussian elimination with
// partial pivoting.
std::vector<double> solve(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    if (a[pivot][col] == 0.0) throw ValidationError("singular polynomial fit");
    std::swap(a[col], a[pivot]);
    std::swap(b[col], b[pivot]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double acc = b[i];
    for (std::size_t c = i + 1; c < n; ++c) acc -= a[i][c] * x[c];
    x[i] = acc / a[i][i];
  }
  return x;
}

}  // namespace

double PolyFit::evaluate(int coordinate, double t) const {
  const auto& c = coefficients[coordinate];
  const double s = t - center;
  double acc = 0.0;
  for (std::size_t k = c.size(); k-- > 0;) acc = acc * s + c[k];
  return acc;
}

BoundingBox PolyFit::evaluate(double t) const {
  return {evaluate(0, t), evaluate(1, t), evaluate(2, t), evaluate(3, t)};
}

PolyFit fit_poly(std::span<const BoundingBox> past, int degree) {
  if (degree != 1 && degree != 2) throw ValidationError("polynomial degree must be 1 or 2");
  if (past.size() < static_cast<std::size_t>(degree) + 1) {
    throw ValidationError("need at least " + std::to_string(degree + 1) + " past boxes for degree " +
                          std::to_string(degree) + ", got " + std::to_string(past.size()));
  }
  PolyFit fit;
  fit.degree = degree;
  fit.window = static_cast<int>(past.size());
  fit.center = 0.5 * (fit.window - 1);
  const std::size_t terms = static_cast<std::size_t>(degree) + 1;

  // Gram matrix of the centered monomials; shared by all four coordinates.
  std::vector<std::vector<double>> gram(terms, std::vector<double>(terms, 0.0));
  for (int t = 0; t < fit.window; ++t) {
    const double s = t - fit.center;
    for (std::size_t i = 0; i < terms; ++i)
      for (std::size_t j = 0; j < terms; ++j) gram[i][j] += std::pow(s, static_cast<double>(i + j));
  }
  for (int coord = 0; coord < 4; ++coord) {
    std::vector<double> rhs(terms, 0.0);
    for (int t = 0; t < fit.window; ++t) {
      const double s = t - fit.center;
      const double y = past[t].as_array()[coord];
      for (std::size_t i = 0; i < terms; ++i) rhs[i] += std::pow(s, static_cast<double>(i)) * y;
    }
    fit.coefficients[coord] = solve(gram, rhs);
  }
  return fit;
}

std::vector<BoundingBox> fit_extrapolate(std::span<const BoundingBox> past, int degree, int delta) {
  if (delta < 1) throw ValidationError("prediction horizon must be >= 1");
  const PolyFit fit = fit_poly(past, degree);
  std::vector<BoundingBox> out;
  out.reserve(delta);
  for (int i = 0; i < delta; ++i) out.push_back(fit.evaluate(static_cast<double>(fit.window + i)));
  return out;
}

int degree_of(Baseline baseline) { return baseline == Baseline::linear ? 1 : 2; }

std::string name_of(Baseline baseline) { return baseline == Baseline::linear ? "linear" : "constaccel"; }

Baseline parse_baseline(const std::string& name) {
  if (name == "linear") return Baseline::linear;
  if (name == "constaccel") return Baseline::const_accel;
  throw ValidationError("unknown baseline \"" + name + "\" (expected linear or constaccel)");
}

}  // namespace fvl::baselines
