#include <gtest/gtest.h>

#include <json.hpp>

#include <cmath>
#include <fstream>

#include "fvl/common/error.hpp"
#include "fvl/common/random.hpp"
#include "fvl/metrics/metrics.hpp"
#include "helpers.hpp"

using namespace fvl;
using namespace fvl::metrics;

namespace {

std::vector<BoundingBox> shifted(const std::vector<BoundingBox>& boxes, double dx, double dy) {
  auto out = boxes;
  for (auto& b : out) {
    b.cx += dx;
    b.cy += dy;
  }
  return out;
}

std::vector<BoundingBox> random_boxes(Rng& rng, int n) {
  std::vector<BoundingBox> out;
  for (int i = 0; i < n; ++i) out.push_back(test::random_box(rng));
  return out;
}

}  // namespace

TEST(Displacement, Examples) {
  Rng rng(1);
  const auto truth = random_boxes(rng, 10);
  const auto same = displacement_errors(truth, truth);
  EXPECT_EQ(same.fde, 0.0);
  EXPECT_EQ(same.ade, 0.0);

  const auto offset = displacement_errors(shifted(truth, 3, 4), truth);
  EXPECT_EQ(offset.fde, 5.0);
  EXPECT_EQ(offset.ade, 5.0);

  auto ramp = truth;
  for (int i = 0; i < 10; ++i) ramp[i].cx += i + 1;
  const auto r = displacement_errors(ramp, truth);
  EXPECT_NEAR(r.fde, 10.0, 1e-12);
  EXPECT_NEAR(r.ade, 5.5, 1e-12);
}

TEST(Displacement, SingleStepAdeEqualsFde) {
  Rng rng(2);
  for (int t = 0; t < 20; ++t) {
    const auto a = random_boxes(rng, 1);
    const auto b = random_boxes(rng, 1);
    const auto d = displacement_errors(a, b);
    EXPECT_EQ(d.ade, d.fde);
  }
}

TEST(Displacement, LengthMismatchAndEmpty) {
  Rng rng(3);
  EXPECT_THROW(displacement_errors(random_boxes(rng, 3), random_boxes(rng, 4)), ValidationError);
  EXPECT_THROW(displacement_errors({}, {}), ValidationError);
}

TEST(FinalIou, Examples) {
  const BoundingBox a{5, 5, 10, 10};
  EXPECT_EQ(final_iou(a, a), 1.0);
  EXPECT_EQ(final_iou(a, {100, 100, 10, 10}), 0.0);
  EXPECT_DOUBLE_EQ(final_iou(a, {10, 5, 10, 10}), 1.0 / 3.0);
  EXPECT_EQ(final_iou({5, 5, 0, 0}, {5, 5, 0, 0}), 0.0);
}

TEST(FinalIou, SymmetricScaleInvariantAndBounded) {
  Rng rng(4);
  for (int t = 0; t < 200; ++t) {
    const auto a = test::random_box(rng);
    BoundingBox b = a;
    b.cx += rng.uniform(-80, 80);
    b.cy += rng.uniform(-60, 60);
    b.w *= rng.uniform(0.5, 2);
    const double iou = final_iou(a, b);
    EXPECT_EQ(iou, final_iou(b, a));
    EXPECT_GE(iou, 0.0);
    EXPECT_LE(iou, 1.0);
    const double s = rng.uniform(0.1, 10);
    const BoundingBox as{a.cx * s, a.cy * s, a.w * s, a.h * s};
    const BoundingBox bs{b.cx * s, b.cy * s, b.w * s, b.h * s};
    EXPECT_NEAR(final_iou(as, bs), iou, 1e-12);
  }
}

TEST(SplitCases, Examples) {
  const std::vector<double> same(5, 7.0);
  for (auto tag : split_cases(same).tags) EXPECT_EQ(tag, CaseTag::challenging);
  const auto two = split_cases(std::vector<double>{10, 90});
  EXPECT_EQ(two.threshold, 50.0);
  EXPECT_EQ(two.tags[0], CaseTag::easy);
  EXPECT_EQ(two.tags[1], CaseTag::challenging);
  EXPECT_THROW(split_cases(std::vector<double>{}), ValidationError);
}

TEST(SplitCases, MatchesIndependentRecomputationSeed5) {
  Rng rng(5);
  std::vector<double> fde;
  for (int i = 0; i < 500; ++i) fde.push_back(std::abs(rng.normal(20, 15)));
  double mean = 0.0;
  for (double f : fde) mean += f;
  mean /= fde.size();
  const auto split = split_cases(fde);
  EXPECT_NEAR(split.threshold, mean, 1e-12);
  for (std::size_t i = 0; i < fde.size(); ++i) {
    EXPECT_EQ(split.tags[i], fde[i] < mean ? CaseTag::easy : CaseTag::challenging);
  }
}

TEST(Report, MeansEqualPerSampleMeans) {
  Rng rng(6);
  std::vector<SampleRecord> records;
  for (std::size_t i = 0; i < 300; ++i) {
    SampleRecord r;
    r.id = i;
    r.video = "v" + std::to_string(i % 7);
    r.fde = rng.uniform(0, 100);
    r.ade = r.fde * rng.uniform(0.3, 1.0);
    r.fiou = rng.uniform();
    r.reference_fde = rng.uniform(0, 100);
    records.push_back(r);
  }
  const auto report = build_report("m", records);
  double sums[3][3] = {};
  std::size_t counts[3] = {};
  for (const auto& r : report.samples) {
    const int k = r.tag == CaseTag::easy ? 0 : 1;
    for (int g : {k, 2}) {
      sums[g][0] += r.fde;
      sums[g][1] += r.ade;
      sums[g][2] += r.fiou;
      ++counts[g];
    }
  }
  const Summary* s[3] = {&report.easy, &report.challenging, &report.all};
  for (int g = 0; g < 3; ++g) {
    ASSERT_EQ(s[g]->count, counts[g]);
    EXPECT_NEAR(s[g]->fde, sums[g][0] / counts[g], 1e-12);
    EXPECT_NEAR(s[g]->ade, sums[g][1] / counts[g], 1e-12);
    EXPECT_NEAR(s[g]->fiou, sums[g][2] / counts[g], 1e-12);
  }
  EXPECT_EQ(report.easy.count + report.challenging.count, report.all.count);
}

TEST(Report, JsonFields) {
  std::vector<SampleRecord> records(2);
  records[0] = {0, "a", 1, 0, 4.0, 2.0, 0.5, 10.0, CaseTag::all};
  records[1] = {1, "b", 2, 3, 8.0, 6.0, 0.25, 90.0, CaseTag::all};
  const auto report = build_report("linear", records);
  test::TempDir dir("report");
  write_report(dir.path() / "r.json", report);
  std::ifstream in(dir.path() / "r.json");
  const auto j = nlohmann::json::parse(in);
  EXPECT_EQ(j["model"], "linear");
  EXPECT_EQ(j["split_threshold_fde"], 50.0);
  EXPECT_EQ(j["all"]["count"], 2);
  EXPECT_EQ(j["all"]["fde"], 6.0);
  EXPECT_EQ(j["easy"]["ade"], 2.0);
  EXPECT_EQ(j["challenging"]["fiou"], 0.25);
  ASSERT_EQ(j["samples"].size(), 2u);
  EXPECT_EQ(j["samples"][1]["case"], "challenging");
  EXPECT_EQ(j["samples"][1]["video"], "b");
  EXPECT_EQ(j["samples"][1]["constaccel_fde"], 90.0);
}
