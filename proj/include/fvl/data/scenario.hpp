#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fvl/geometry/box.hpp"

namespace fvl::data {

// Ego plan piece: from `start_frame` on, turn at `yaw_rate` (rad/s, positive
// left) and drive at `speed` (m/s).
struct EgoSegment {
  int start_frame = 0;
  double yaw_rate = 0.0;
  double speed = 0.0;
};

// Vehicle with a box body on the ground plane. World axes: x, y on the ground
// (y to the left of the ego's initial heading), heading in radians from +x.
struct ActorSpec {
  double x = 20.0;
  double y = 0.0;
  double heading = 0.0;
  double speed = 0.0;     // m/s
  double accel = 0.0;     // m/s^2; speed is clamped at zero
  double yaw_rate = 0.0;  // rad/s
  double length = 4.5;
  double width = 1.8;
  double height = 1.5;
};

struct Scenario {
  std::string name = "scenario";
  ImageSize image;
  double fps = 10.0;
  int frames = 60;
  // Pinhole camera at the ego origin looking along the heading, y down.
  double focal = 640.0;
  double principal_x = 640.0;
  double principal_y = 320.0;
  double camera_height = 1.5;
  // Actor corners closer than this (m, along the optical axis) hide the actor.
  double near_clip = 1.0;
  // Clipped boxes narrower or shorter than this (px) are dropped.
  double min_box_size = 4.0;
  // Boxes keeping less than this share of their unclipped area are dropped.
  double min_visible_fraction = 0.0;
  // Flow grids are rendered at image size / flow_downsample.
  int flow_downsample = 4;
  // Std-dev (px) of Gaussian jitter on every emitted box coordinate.
  double box_noise = 0.0;
  std::vector<EgoSegment> ego_plan;
  std::vector<ActorSpec> actors;

  // Yaw rate and speed of the ego at `frame`, from the last segment starting
  // at or before it (zero motion before the first segment).
  EgoSegment ego_at(int frame) const;
};

// Throws ValidationError describing the first inconsistent field.
void validate(const Scenario& scenario);

// Text format: `key=value` lines at top level, repeatable
// `ego=<start_frame> <yaw_rate rad/s> <speed m/s>` lines, and one `[actor]`
// header per actor followed by its `key=value` fields. '#' comments.
// Errors are FormatError with the line number.
Scenario parse_scenario(const std::filesystem::path& path);
Scenario parse_scenario_text(const std::string& text, const std::string& source = "<scenario>");
std::string format_scenario(const Scenario& scenario);

// Randomized intersection-style videos: ego yaw-rate segments drawn from
// [-max_yaw_rate, max_yaw_rate] rad/s, several crossing, oncoming and leading
// actors, box jitter of `box_noise` px.
struct SuiteOptions {
  int count = 100;
  int frames = 60;
  double max_yaw_rate = 0.3;
  // Ego segments last a uniform number of frames in [min, max].
  int min_segment = 15;
  int max_segment = 30;
  double box_noise = 10.0;
  double min_visible_fraction = 0.8;
  int flow_downsample = 4;
};
std::vector<Scenario> turn_heavy_suite(const SuiteOptions& options, std::uint64_t seed);

}  // namespace fvl::data
