#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fvl/ego/egomotion.hpp"
#include "fvl/flow/roi_pool.hpp"
#include "fvl/geometry/box.hpp"

namespace fvl::data {

inline constexpr int kDefaultTau = 10;
inline constexpr int kDefaultDelta = 10;

// One training/evaluation record anchored at frame t0 = start_frame + tau - 1.
struct Sample {
  std::size_t id = 0;
  std::string video;
  int track = 0;
  int start_frame = 0;
  ImageSize image;
  std::vector<BoundingBox> past;         // tau boxes, oldest first
  std::vector<flow::PooledFlow> flow;    // tau pooled features aligned with `past`
  std::vector<BoundingBox> future;       // delta boxes after t0
  std::vector<ego::EgoFeature> ego;      // delta poses relative to t0

  int tau() const { return static_cast<int>(past.size()); }
  int delta() const { return static_cast<int>(future.size()); }
  const BoundingBox& anchor() const { return past.back(); }
  bool operator==(const Sample&) const = default;
};

// Per-track observations over consecutive frames of one video.
struct Track {
  int id = 0;
  int first_frame = 0;
  std::vector<BoundingBox> boxes;
  // Either empty or one entry per box.
  std::vector<flow::PooledFlow> flow;

  int length() const { return static_cast<int>(boxes.size()); }
};

struct WindowStats {
  std::size_t tracks = 0;
  std::size_t short_tracks = 0;
  std::size_t samples = 0;
};

// Sliding windows of length tau + delta with stride 1. `ego_log` holds one
// step per frame of the video (entry k: frame k -> k + 1). Tracks shorter than
// tau + delta contribute nothing and are counted in `stats`. Sample ids are
// left at 0; callers number them.
std::vector<Sample> window(const Track& track, std::span<const ego::EgoLogEntry> ego_log, int tau, int delta,
                           const std::string& video, const ImageSize& image, WindowStats* stats = nullptr);

// Number of windows a track of `length` frames yields.
inline std::size_t window_count(int length, int tau, int delta) {
  const int n = length - tau - delta + 1;
  return n > 0 ? static_cast<std::size_t>(n) : 0;
}

// cx, w over width; cy, h over height. Throws ValidationError on a
// non-positive image size.
NormalizedBox normalize(const BoundingBox& box, const ImageSize& image);
BoundingBox denormalize(const NormalizedBox& box, const ImageSize& image);

struct NormalizedSample {
  std::vector<NormalizedBox> past;
  std::vector<NormalizedBox> future;
  // Flow u over width, v over height.
  std::vector<std::vector<double>> flow;
  std::vector<ego::EgoFeature> ego;
};

NormalizedSample normalize(const Sample& sample);
// Restores pixel boxes and flow; identity fields are copied from `like`.
Sample denormalize(const NormalizedSample& normalized, const Sample& like);

// Throws ValidationError when lengths disagree or boxes are degenerate.
void validate(const Sample& sample);

}  // namespace fvl::data
