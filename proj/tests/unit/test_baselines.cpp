#include <gtest/gtest.h>

#include <cmath>

#include "fvl/baselines/extrapolate.hpp"
#include "fvl/common/error.hpp"
#include "fvl/common/random.hpp"
#include "helpers.hpp"

using namespace fvl;
using namespace fvl::baselines;
using fvl::test::poly_track;

TEST(Baselines, StationaryBoxStaysPut) {
  const std::vector<BoundingBox> past(10, BoundingBox{300, 200, 50, 40});
  for (int degree : {1, 2}) {
    for (const auto& b : fit_extrapolate(past, degree, 10)) {
      EXPECT_NEAR(b.cx, 300, 1e-9);
      EXPECT_NEAR(b.cy, 200, 1e-9);
      EXPECT_NEAR(b.w, 50, 1e-9);
      EXPECT_NEAR(b.h, 40, 1e-9);
    }
  }
}

TEST(Baselines, LinearDataLinearFit) {
  std::vector<BoundingBox> past;
  for (int t = 0; t < 10; ++t) past.push_back({1.0 + 2.0 * t, 100, 30, 20});
  const auto out = fit_extrapolate(past, 1, 10);
  ASSERT_EQ(out.size(), 10u);
  for (int i = 0; i < 10; ++i) EXPECT_LT(std::abs(out[i].cx - (21.0 + 2.0 * i)), 1e-9);
}

TEST(Baselines, QuadraticDataQuadraticFit) {
  std::vector<BoundingBox> past;
  auto f = [](double t) { return 1.0 + 2.0 * t + 0.5 * t * t; };
  for (int t = 0; t < 10; ++t) past.push_back({f(t), 100, 30, 20});
  const auto out = fit_extrapolate(past, 2, 10);
  for (int i = 0; i < 10; ++i) EXPECT_LT(std::abs(out[i].cx - f(10 + i)), 1e-9);
}

TEST(Baselines, ExactOnMatchingDegreeForEveryCoordinate) {
  Rng rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    const BoundingBox start = test::random_box(rng);
    const BoundingBox vel{rng.uniform(-8, 8), rng.uniform(-5, 5), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    const BoundingBox acc{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1)};
    const auto lin_truth = poly_track(start, vel, {}, 10, 10);
    const auto lin = extrapolate(Baseline::linear, poly_track(start, vel, {}, 0, 10), 10);
    const auto quad_truth = poly_track(start, vel, acc, 10, 10);
    const auto quad = extrapolate(Baseline::const_accel, poly_track(start, vel, acc, 0, 10), 10);
    for (int i = 0; i < 10; ++i) {
      const auto a = lin[i].as_array();
      const auto b = lin_truth[i].as_array();
      const auto c = quad[i].as_array();
      const auto d = quad_truth[i].as_array();
      for (int k = 0; k < 4; ++k) {
        EXPECT_NEAR(a[k], b[k], 1e-9);
        EXPECT_NEAR(c[k], d[k], 1e-9);
      }
    }
  }
}

TEST(Baselines, TranslationEquivariance) {
  Rng rng(32);
  std::vector<BoundingBox> past;
  for (int t = 0; t < 10; ++t) past.push_back(test::random_box(rng));
  for (int degree : {1, 2}) {
    const auto base = fit_extrapolate(past, degree, 10);
    auto shifted_past = past;
    for (auto& b : shifted_past) b.cx += 37.25;
    const auto shifted = fit_extrapolate(shifted_past, degree, 10);
    for (int i = 0; i < 10; ++i) EXPECT_NEAR(shifted[i].cx, base[i].cx + 37.25, 1e-9);
  }
}

TEST(Baselines, QuadraticFitOnLinearDataAgreesWithLinearFit) {
  Rng rng(33);
  const BoundingBox start = test::random_box(rng);
  const auto past = poly_track(start, {3, -2, 0.5, 0.25}, {}, 0, 10);
  const auto a = fit_extrapolate(past, 1, 10);
  const auto b = fit_extrapolate(past, 2, 10);
  for (int i = 0; i < 10; ++i) {
    EXPECT_NEAR(a[i].cx, b[i].cx, 1e-9);
    EXPECT_NEAR(a[i].cy, b[i].cy, 1e-9);
  }
}

TEST(Baselines, WindowTooShortOrBadDegree) {
  const std::vector<BoundingBox> two(2, BoundingBox{1, 1, 1, 1});
  EXPECT_NO_THROW(fit_extrapolate(two, 1, 3));
  EXPECT_THROW(fit_extrapolate(two, 2, 3), ValidationError);
  EXPECT_THROW(fit_extrapolate(two, 3, 3), ValidationError);
  const auto fit = fit_poly(std::vector<BoundingBox>(5, BoundingBox{1, 1, 1, 1}), 2);
  for (const auto& c : fit.coefficients) EXPECT_EQ(c.size(), 3u);
}

TEST(Baselines, Names) {
  EXPECT_EQ(parse_baseline("linear"), Baseline::linear);
  EXPECT_EQ(parse_baseline("constaccel"), Baseline::const_accel);
  EXPECT_EQ(name_of(Baseline::const_accel), "constaccel");
  EXPECT_THROW(parse_baseline("kalman"), ValidationError);
}
