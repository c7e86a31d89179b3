#include "fvl/data/sample.hpp"

#include <cmath>

#include "fvl/common/error.hpp"

namespace fvl::data {

std::vector<Sample> window(const Track& track, std::span<const ego::EgoLogEntry> ego_log, int tau, int delta,
                           const std::string& video, const ImageSize& image, WindowStats* stats) {
  if (tau < 1 || delta < 1) throw ValidationError("window lengths must be positive");
  if (!track.flow.empty() && track.flow.size() != track.boxes.size()) {
    throw ValidationError("track " + std::to_string(track.id) + " has flow for only some frames");
  }
  const std::size_t count = window_count(track.length(), tau, delta);
  if (stats) {
    ++stats->tracks;
    if (count == 0) ++stats->short_tracks;
    stats->samples += count;
  }
  std::vector<Sample> samples;
  samples.reserve(count);
  const int ego_origin = ego_log.empty() ? 0 : ego_log.front().frame;
  for (std::size_t s = 0; s < count; ++s) {
    Sample sample;
    sample.video = video;
    sample.track = track.id;
    sample.start_frame = track.first_frame + static_cast<int>(s);
    sample.image = image;
    const auto first = track.boxes.begin() + static_cast<std::ptrdiff_t>(s);
    sample.past.assign(first, first + tau);
    sample.future.assign(first + tau, first + tau + delta);
    if (!track.flow.empty()) {
      const auto f = track.flow.begin() + static_cast<std::ptrdiff_t>(s);
      sample.flow.assign(f, f + tau);
    }
    if (!ego_log.empty()) {
      const int t0 = sample.start_frame + tau - 1;
      const int begin = t0 - ego_origin;
      if (begin < 0 || begin + delta > static_cast<int>(ego_log.size())) {
        throw ValidationError("ego log of video " + video + " does not cover frames " + std::to_string(t0) +
                              ".." + std::to_string(t0 + delta));
      }
      std::vector<ego::EgoStep> steps;
      steps.reserve(delta);
      for (int k = 0; k < delta; ++k) steps.push_back(ego_log[begin + k].to_step());
      sample.ego = ego::compose(steps);
    }
    samples.push_back(std::move(sample));
  }
  return samples;
}

NormalizedBox normalize(const BoundingBox& box, const ImageSize& image) {
  if (image.width <= 0 || image.height <= 0) throw ValidationError("image size must be positive");
  const double w = image.width;
  const double h = image.height;
  return {box.cx / w, box.cy / h, box.w / w, box.h / h};
}

BoundingBox denormalize(const NormalizedBox& box, const ImageSize& image) {
  if (image.width <= 0 || image.height <= 0) throw ValidationError("image size must be positive");
  const double w = image.width;
  const double h = image.height;
  return {box.cx * w, box.cy * h, box.w * w, box.h * h};
}

NormalizedSample normalize(const Sample& sample) {
  NormalizedSample n;
  for (const auto& b : sample.past) n.past.push_back(normalize(b, sample.image));
  for (const auto& b : sample.future) n.future.push_back(normalize(b, sample.image));
  for (const auto& f : sample.flow) {
    std::vector<double> values(f.values.size());
    for (std::size_t i = 0; i < values.size(); i += 2) {
      values[i] = f.values[i] / sample.image.width;
      values[i + 1] = f.values[i + 1] / sample.image.height;
    }
    n.flow.push_back(std::move(values));
  }
  n.ego = sample.ego;
  return n;
}

Sample denormalize(const NormalizedSample& normalized, const Sample& like) {
  Sample s = like;
  s.past.clear();
  s.future.clear();
  s.flow.clear();
  for (const auto& b : normalized.past) s.past.push_back(denormalize(b, like.image));
  for (const auto& b : normalized.future) s.future.push_back(denormalize(b, like.image));
  for (std::size_t k = 0; k < normalized.flow.size(); ++k) {
    const auto& values = normalized.flow[k];
    flow::PooledFlow f;
    f.grid_size = k < like.flow.size() ? like.flow[k].grid_size
                                       : static_cast<int>(std::lround(std::sqrt(values.size() / 2.0)));
    f.values.resize(values.size());
    for (std::size_t i = 0; i < values.size(); i += 2) {
      f.values[i] = values[i] * like.image.width;
      f.values[i + 1] = values[i + 1] * like.image.height;
    }
    s.flow.push_back(std::move(f));
  }
  s.ego = normalized.ego;
  return s;
}

void validate(const Sample& sample) {
  const std::string who = "sample " + std::to_string(sample.id);
  if (sample.image.width <= 0 || sample.image.height <= 0) throw ValidationError(who + ": bad image size");
  if (sample.past.empty() || sample.future.empty()) throw ValidationError(who + ": empty past or future");
  if (!sample.flow.empty() && sample.flow.size() != sample.past.size()) {
    throw ValidationError(who + ": flow length differs from past length");
  }
  if (!sample.ego.empty() && sample.ego.size() != sample.future.size()) {
    throw ValidationError(who + ": ego length differs from future length");
  }
  const auto check = [&](const BoundingBox& b) {
    if (!(b.w > 0.0 && b.h > 0.0) || !std::isfinite(b.cx) || !std::isfinite(b.cy)) {
      throw ValidationError(who + ": degenerate box");
    }
  };
  for (const auto& b : sample.past) check(b);
  for (const auto& b : sample.future) check(b);
}

}  // namespace fvl::data
