#pragma once

#include <cstdint>
#include <vector>

#include "fvl/data/scenario.hpp"
#include "fvl/data/video.hpp"
#include "fvl/ego/egomotion.hpp"

namespace fvl::data {

struct GeneratedVideo {
  Video video;
  // Camera pose at every frame in the coordinates of frame 0.
  std::vector<ego::Pose2> camera_poses;
  // Noise-free box per (frame, track), before jitter; same order as video.boxes.
  std::vector<BoxRecord> clean_boxes;
};

// Simulates the scenario from one warm-up frame before frame 0 so that frame
// 0 has flow. Actor states in the scenario are those at frame 0. Flow at frame
// t is the motion from frame t - 1 to t, in image pixels, at the grid
// resolution image / flow_downsample. Box jitter draws from Rng(seed).
GeneratedVideo generate_scenario(const Scenario& scenario, std::uint64_t seed);

}  // namespace fvl::data
