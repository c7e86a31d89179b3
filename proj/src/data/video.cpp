#include "fvl/data/video.hpp"

#include <algorithm>
#include <map>

#include "fvl/common/error.hpp"

namespace fvl::data {

std::vector<Track> tracks(const Video& video) {
  std::map<int, std::vector<const BoxRecord*>> by_id;
  for (const auto& r : video.boxes) by_id[r.track].push_back(&r);
  std::vector<Track> out;
  for (auto& [id, records] : by_id) {
    std::stable_sort(records.begin(), records.end(),
                     [](const BoxRecord* a, const BoxRecord* b) { return a->frame < b->frame; });
    Track* run = nullptr;
    int last_frame = 0;
    for (const BoxRecord* r : records) {
      if (run == nullptr || r->frame != last_frame + 1) {
        run = &out.emplace_back();
        run->id = id;
        run->first_frame = r->frame;
      }
      run->boxes.push_back(r->box);
      if (video.pooled_ready()) {
        const auto it = video.pooled.find({id, r->frame});
        if (it == video.pooled.end()) {
          throw ValidationError("video " + video.name + " lacks pooled flow for track " + std::to_string(id) +
                                " at frame " + std::to_string(r->frame));
        }
        run->flow.push_back(it->second);
      }
      last_frame = r->frame;
    }
  }
  return out;
}

void pool_video(Video& video, double expand, int n) {
  if (video.flow.size() != static_cast<std::size_t>(video.frames)) {
    throw ValidationError("video " + video.name + " has " + std::to_string(video.flow.size()) +
                          " flow grids for " + std::to_string(video.frames) + " frames");
  }
  std::map<std::pair<int, int>, flow::PooledFlow> pooled;
  for (const auto& r : video.boxes) {
    if (r.frame < 0 || r.frame >= video.frames) {
      throw ValidationError("video " + video.name + " has a box outside its frame range");
    }
    const BoundingBox roi = flow::expand_roi(r.box, expand, video.image.width, video.image.height);
    pooled[{r.track, r.frame}] = flow::roi_pool_image(video.flow[r.frame], roi, n, video.image);
  }
  video.pooled = std::move(pooled);
  video.pool_expand = expand;
  video.pool_n = n;
}

std::vector<Sample> video_samples(const Video& video, int tau, int delta, WindowStats* stats) {
  std::vector<Sample> out;
  for (const Track& track : tracks(video)) {
    auto samples = window(track, video.ego, tau, delta, video.name, video.image, stats);
    for (auto& s : samples) out.push_back(std::move(s));
  }
  return out;
}

}  // namespace fvl::data
