#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "fvl/common/error.hpp"
#include "fvl/data/generator.hpp"
#include "fvl/data/scenario.hpp"
#include "fvl/data/video.hpp"
#include "fvl/ego/egomotion.hpp"
#include "fvl/flow/roi_pool.hpp"

using namespace fvl;
using namespace fvl::data;

namespace {

Scenario base_scenario(int frames = 30) {
  Scenario s;
  s.name = "gen";
  s.frames = frames;
  return s;
}

ActorSpec actor_at(double x, double y) {
  ActorSpec a;
  a.x = x;
  a.y = y;
  return a;
}

std::vector<BoundingBox> track_boxes(const std::vector<BoxRecord>& records, int track) {
  std::vector<BoundingBox> out;
  for (const auto& r : records) {
    if (r.track == track) out.push_back(r.box);
  }
  return out;
}

std::array<double, 2> cell(const flow::FlowGrid& g, const BoundingBox& box, int downsample) {
  const int gx = static_cast<int>(box.cx / downsample);
  const int gy = static_cast<int>(box.cy / downsample);
  return {g.u(gx, gy), g.v(gx, gy)};
}

}  // namespace

TEST(Generator, StaticSceneIsFrozen) {
  Scenario s = base_scenario();
  s.actors = {actor_at(20, 1)};
  const auto out = generate_scenario(s, 1);
  const auto boxes = track_boxes(out.video.boxes, 0);
  ASSERT_EQ(boxes.size(), 30u);
  for (const auto& b : boxes) EXPECT_EQ(b, boxes.front());
  for (const auto& g : out.video.flow) {
    for (double v : g.data) ASSERT_EQ(v, 0.0);
  }
}

TEST(Generator, LateralCrossingMovesMonotonicallyAndFlowMatchesBoxes) {
  Scenario s = base_scenario();
  ActorSpec a = actor_at(20, 5);
  a.heading = -std::numbers::pi / 2;
  a.speed = 2.0;
  s.actors = {a};
  const auto out = generate_scenario(s, 1);
  const auto boxes = track_boxes(out.video.boxes, 0);
  ASSERT_EQ(boxes.size(), 30u);
  for (std::size_t t = 1; t < boxes.size(); ++t) {
    EXPECT_GT(boxes[t].cx, boxes[t - 1].cx);
    const auto f = cell(out.video.flow[t], boxes[t], s.flow_downsample);
    EXPECT_EQ(f[0], boxes[t].cx - boxes[t - 1].cx);
    EXPECT_EQ(f[1], boxes[t].cy - boxes[t - 1].cy);
  }
}

TEST(Generator, TurningEgoLogComposesToTheAnalyticYaw) {
  Scenario s = base_scenario(60);
  s.ego_plan = {{0, 0.3, 5.0}};
  s.actors = {actor_at(30, 0)};
  const auto out = generate_scenario(s, 1);
  std::vector<ego::EgoStep> steps;
  for (const auto& e : out.video.ego) steps.push_back(e.to_step());
  EXPECT_NEAR(ego::compose(steps).back().yaw, 0.3 * 60 / s.fps, 1e-9);
}

TEST(Generator, EgoLogReproducesCameraPoses) {
  Scenario s = base_scenario(50);
  s.ego_plan = {{0, 0.2, 6.0}, {10, -0.25, 4.0}, {30, 0.05, 8.0}};
  s.actors = {actor_at(30, 2)};
  const auto out = generate_scenario(s, 2);
  std::vector<ego::EgoStep> steps;
  for (const auto& e : out.video.ego) steps.push_back(e.to_step());
  const auto poses = ego::accumulate(steps);
  ASSERT_EQ(out.camera_poses.size(), 50u);
  for (std::size_t t = 1; t < out.camera_poses.size(); ++t) {
    const auto& want = out.camera_poses[t];
    const auto& got = poses[t - 1];
    for (int a = 0; a < 2; ++a) {
      EXPECT_NEAR(got.translation[a], want.translation[a], 1e-9);
      for (int b = 0; b < 2; ++b) EXPECT_NEAR(got.rotation.m[a][b], want.rotation.m[a][b], 1e-9);
    }
  }
}

TEST(Generator, DeterministicGivenScenarioAndSeed) {
  Scenario s = base_scenario();
  s.box_noise = 3.0;
  s.ego_plan = {{0, 0.1, 5.0}};
  ActorSpec a = actor_at(25, -2);
  a.speed = 3;
  a.yaw_rate = 0.1;
  s.actors = {a, actor_at(40, 4)};
  const auto first = generate_scenario(s, 9);
  const auto second = generate_scenario(s, 9);
  EXPECT_EQ(first.video.boxes, second.video.boxes);
  ASSERT_EQ(first.video.flow.size(), second.video.flow.size());
  for (std::size_t t = 0; t < first.video.flow.size(); ++t) EXPECT_EQ(first.video.flow[t].data, second.video.flow[t].data);
  EXPECT_NE(generate_scenario(s, 10).video.boxes, first.video.boxes);
}

TEST(Generator, ZeroNoiseEmitsCleanBoxes) {
  Scenario s = base_scenario();
  s.ego_plan = {{0, 0.1, 5.0}};
  s.actors = {actor_at(25, 1)};
  const auto out = generate_scenario(s, 3);
  EXPECT_EQ(out.video.boxes, out.clean_boxes);
}

TEST(Generator, ActorBehindCameraHasNoBox) {
  Scenario s = base_scenario();
  s.actors = {actor_at(-10, 0), actor_at(20, 0)};
  const auto out = generate_scenario(s, 1);
  EXPECT_TRUE(track_boxes(out.video.boxes, 0).empty());
  EXPECT_EQ(track_boxes(out.video.boxes, 1).size(), 30u);
}

TEST(Generator, PooledActorFlowIsExactlyItsDisplacement) {
  Scenario s = base_scenario();
  s.flow_downsample = 1;
  s.ego_plan = {{0, 0.15, 4.0}};
  ActorSpec a = actor_at(12, 1);
  a.speed = 3.0;
  a.heading = 0.4;
  s.actors = {a};
  auto out = generate_scenario(s, 4);
  const auto clean = track_boxes(out.clean_boxes, 0);
  ASSERT_EQ(clean.size(), 30u);
  for (std::size_t t = 1; t < clean.size(); ++t) {
    ASSERT_GT(clean[t].w, 40.0);
    const auto pooled = flow::roi_pool_image(out.video.flow[t], clean[t], 5, s.image);
    for (std::size_t k = 0; k < pooled.values.size(); k += 2) {
      ASSERT_EQ(pooled.values[k], clean[t].cx - clean[t - 1].cx) << "frame " << t;
      ASSERT_EQ(pooled.values[k + 1], clean[t].cy - clean[t - 1].cy) << "frame " << t;
    }
  }
}

TEST(Generator, InvalidScenarioIsRejected) {
  Scenario s = base_scenario();
  s.frames = 0;
  EXPECT_THROW(generate_scenario(s, 1), ValidationError);
  s = base_scenario();
  s.flow_downsample = 0;
  EXPECT_THROW(validate(s), ValidationError);
}

TEST(Suite, RespectsItsOptions) {
  SuiteOptions options;
  options.count = 40;
  const auto suite = turn_heavy_suite(options, 2024);
  ASSERT_EQ(suite.size(), 40u);
  bool turned = false;
  for (const auto& s : suite) {
    EXPECT_NO_THROW(validate(s));
    EXPECT_EQ(s.frames, options.frames);
    EXPECT_EQ(s.box_noise, options.box_noise);
    EXPECT_FALSE(s.actors.empty());
    ASSERT_FALSE(s.ego_plan.empty());
    EXPECT_EQ(s.ego_plan.front().start_frame, 0);
    for (std::size_t k = 0; k < s.ego_plan.size(); ++k) {
      EXPECT_LE(std::abs(s.ego_plan[k].yaw_rate), options.max_yaw_rate);
      if (std::abs(s.ego_plan[k].yaw_rate) > 0.2) turned = true;
      if (k > 0) {
        const int length = s.ego_plan[k].start_frame - s.ego_plan[k - 1].start_frame;
        EXPECT_GE(length, options.min_segment);
        EXPECT_LE(length, options.max_segment);
      }
    }
  }
  EXPECT_TRUE(turned);
  const auto again = turn_heavy_suite(options, 2024);
  for (std::size_t i = 0; i < suite.size(); ++i) EXPECT_EQ(format_scenario(again[i]), format_scenario(suite[i]));
  EXPECT_NE(format_scenario(turn_heavy_suite(options, 2025)[0]), format_scenario(suite[0]));
}
