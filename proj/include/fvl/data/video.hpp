#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "fvl/data/sample.hpp"
#include "fvl/ego/egomotion.hpp"
#include "fvl/flow/flow_grid.hpp"
#include "fvl/flow/roi_pool.hpp"
#include "fvl/geometry/box.hpp"

namespace fvl::data {

struct BoxRecord {
  int frame = 0;
  int track = 0;
  BoundingBox box;
  bool operator==(const BoxRecord&) const = default;
};

// All streams of one recorded (or generated) video.
struct Video {
  std::string name;
  ImageSize image;
  double fps = 10.0;
  int frames = 0;
  std::vector<BoxRecord> boxes;           // sorted by (frame, track)
  std::vector<ego::EgoLogEntry> ego;      // entry k: frame k -> k + 1
  std::vector<flow::FlowGrid> flow;       // one grid per frame, or empty
  // Pooled descriptors keyed by (track, frame); filled by pool_video.
  std::map<std::pair<int, int>, flow::PooledFlow> pooled;
  double pool_expand = 0.0;
  int pool_n = 0;

  bool pooled_ready() const { return pool_n > 0; }
};

// Splits each track id into runs of consecutive frames. Runs of the same id
// keep that id. Pooled flow is attached when the video has been pooled.
std::vector<Track> tracks(const Video& video);

// Pools every box of the video from the grid of its frame. Replaces earlier
// pooling, so repeated calls with the same arguments give the same result.
void pool_video(Video& video, double expand, int n);

// Windows every track. Samples carry flow only when the video is pooled.
std::vector<Sample> video_samples(const Video& video, int tau, int delta, WindowStats* stats = nullptr);

}  // namespace fvl::data
