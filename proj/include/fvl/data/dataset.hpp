#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fvl/data/sample.hpp"
#include "fvl/data/scenario.hpp"
#include "fvl/data/video.hpp"

namespace fvl::data {

// Video directory layout:
//   meta            key=value: width height fps frames tau delta flow_width
//                   flow_height [pool_expand pool_n]
//   boxes.jsonl     {"frame","track","cx","cy","w","h"} per frame per track
//   ego.txt         ego log, one step per frame
//   flow/NNNNNN.ffgr  one grid per frame
//   pooled.jsonl    {"frame","track","n","o":[u1,v1,...]} after pooling
void save_video(const std::filesystem::path& dir, const Video& video, int tau = kDefaultTau,
                int delta = kDefaultDelta);
// With `with_flow` false the grids are not read (pooled features still are).
Video load_video(const std::filesystem::path& dir, bool with_flow = true);

// Rewrites pooled.jsonl and the pooling keys of meta for a saved video.
void save_pooled(const std::filesystem::path& dir, const Video& video);

struct DatasetSplit {
  std::vector<std::string> train;
  std::vector<std::string> test;
};

// `split.txt` lines: `train <video>` or `test <video>`.
void save_split(const std::filesystem::path& root, const DatasetSplit& split);
DatasetSplit load_split(const std::filesystem::path& root);

// Video-level 70/30 split from a seeded shuffle of `names`.
DatasetSplit split_videos(std::vector<std::string> names, std::uint64_t seed, double train_fraction = 0.7);

struct GenerateOptions {
  int tau = kDefaultTau;
  int delta = kDefaultDelta;
  bool pool = true;
  double roi_expand = flow::kDefaultRoiExpand;
  int pool_n = flow::kDefaultPoolSize;
};

// Generates every scenario (seeds derived from `seed`), writes one directory
// per video under `root`, and writes split.txt. Returns the video names.
std::vector<std::string> generate_dataset(const std::filesystem::path& root, const std::vector<Scenario>& scenarios,
                                          std::uint64_t seed, const GenerateOptions& options = {});

// Pools every video listed in split.txt (or every subdirectory with a meta
// file when there is no split).
void pool_dataset(const std::filesystem::path& root, double expand, int n);

// Samples of the named videos, numbered from 0 in video order.
std::vector<Sample> load_samples(const std::filesystem::path& root, const std::vector<std::string>& videos, int tau,
                                 int delta, WindowStats* stats = nullptr);

// Flat sample file, one JSON object per line. Boxes and ego are exact; flow
// is rounded to f32.
void write_dataset(const std::vector<Sample>& samples, const std::filesystem::path& path);

// Accepts a samples file, a directory holding samples.jsonl, or a video
// dataset root (all videos, windowed with tau and delta).
std::vector<Sample> read_dataset(const std::filesystem::path& path, int tau = kDefaultTau, int delta = kDefaultDelta);

}  // namespace fvl::data
