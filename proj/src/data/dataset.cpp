#include "fvl/data/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>

#include <json.hpp>

#include "fvl/common/error.hpp"
#include "fvl/common/random.hpp"
#include "fvl/common/text.hpp"
#include "fvl/data/generator.hpp"

namespace fvl::data {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  return out;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return in;
}

fs::path flow_path(const fs::path& dir, int frame) {
  char name[32];
  std::snprintf(name, sizeof(name), "%06d.ffgr", frame);
  return dir / "flow" / name;
}

// Calls `fn(object, where)` for every non-blank line of a JSONL file.
template <typename Fn>
void for_each_json_line(const fs::path& path, Fn fn) {
  auto in = open_in(path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    try {
      fn(json::parse(line), where);
    } catch (const json::exception& e) {
      throw FormatError(where + ": " + e.what());
    }
  }
}

void write_meta(const fs::path& dir, const Video& video, int tau, int delta) {
  std::map<std::string, std::string> kv;
  kv["width"] = std::to_string(video.image.width);
  kv["height"] = std::to_string(video.image.height);
  kv["fps"] = text::format_double(video.fps);
  kv["frames"] = std::to_string(video.frames);
  kv["tau"] = std::to_string(tau);
  kv["delta"] = std::to_string(delta);
  if (!video.flow.empty()) {
    kv["flow_width"] = std::to_string(video.flow.front().width);
    kv["flow_height"] = std::to_string(video.flow.front().height);
  }
  if (video.pooled_ready()) {
    kv["pool_expand"] = text::format_double(video.pool_expand);
    kv["pool_n"] = std::to_string(video.pool_n);
  }
  text::write_key_values(dir / "meta", kv);
}

void write_pooled_file(const fs::path& dir, const Video& video) {
  auto out = open_out(dir / "pooled.jsonl");
  for (const auto& [key, pooled] : video.pooled) {
    json j = {{"frame", key.second}, {"track", key.first}, {"n", pooled.grid_size}, {"o", pooled.values}};
    out << j.dump() << '\n';
  }
}

}  // namespace

void save_video(const fs::path& dir, const Video& video, int tau, int delta) {
  fs::create_directories(dir);
  write_meta(dir, video, tau, delta);
  {
    auto out = open_out(dir / "boxes.jsonl");
    for (const auto& r : video.boxes) {
      json j = {{"frame", r.frame}, {"track", r.track}, {"cx", r.box.cx},
                {"cy", r.box.cy},   {"w", r.box.w},         {"h", r.box.h}};
      out << j.dump() << '\n';
    }
  }
  ego::save_ego_log(dir / "ego.txt", video.ego);
  if (!video.flow.empty()) {
    fs::create_directories(dir / "flow");
    for (std::size_t t = 0; t < video.flow.size(); ++t) {
      flow::save_flow_grid(flow_path(dir, static_cast<int>(t)), video.flow[t]);
    }
  }
  if (video.pooled_ready()) {
    write_pooled_file(dir, video);
  } else {
    fs::remove(dir / "pooled.jsonl");
  }
}

void save_pooled(const fs::path& dir, const Video& video) {
  auto kv = text::read_key_values(dir / "meta");
  kv["pool_expand"] = text::format_double(video.pool_expand);
  kv["pool_n"] = std::to_string(video.pool_n);
  text::write_key_values(dir / "meta", kv);
  write_pooled_file(dir, video);
}

Video load_video(const fs::path& dir, bool with_flow) {
  const std::string meta_src = (dir / "meta").string();
  const auto kv = text::read_key_values(dir / "meta");
  Video video;
  video.name = dir.filename().string();
  video.image.width = text::parse_int(text::require_key(kv, "width", meta_src), meta_src);
  video.image.height = text::parse_int(text::require_key(kv, "height", meta_src), meta_src);
  video.fps = text::parse_double(text::require_key(kv, "fps", meta_src), meta_src);
  video.frames = text::parse_int(text::require_key(kv, "frames", meta_src), meta_src);
  if (video.image.width <= 0 || video.image.height <= 0 || video.frames < 0) {
    throw FormatError(meta_src + ": bad image size or frame count");
  }

  for_each_json_line(dir / "boxes.jsonl", [&](const json& j, const std::string& where) {
    BoxRecord r{j.at("frame").get<int>(), j.at("track").get<int>(),
                {j.at("cx").get<double>(), j.at("cy").get<double>(), j.at("w").get<double>(),
                 j.at("h").get<double>()}};
    if (r.frame < 0 || r.frame >= video.frames) throw FormatError(where + ": frame out of range");
    if (!(r.box.w > 0.0 && r.box.h > 0.0)) throw FormatError(where + ": box without positive size");
    video.boxes.push_back(r);
  });
  std::stable_sort(video.boxes.begin(), video.boxes.end(), [](const BoxRecord& a, const BoxRecord& b) {
    return a.frame != b.frame ? a.frame < b.frame : a.track < b.track;
  });

  video.ego = ego::load_ego_log(dir / "ego.txt");

  if (with_flow && fs::exists(dir / "flow")) {
    for (int t = 0; t < video.frames; ++t) video.flow.push_back(flow::load_flow_grid(flow_path(dir, t)));
  }

  if (kv.count("pool_n") && fs::exists(dir / "pooled.jsonl")) {
    video.pool_n = text::parse_int(kv.at("pool_n"), meta_src);
    video.pool_expand = text::parse_double(text::require_key(kv, "pool_expand", meta_src), meta_src);
    const std::size_t expected = 2 * static_cast<std::size_t>(video.pool_n) * video.pool_n;
    for_each_json_line(dir / "pooled.jsonl", [&](const json& j, const std::string& where) {
      flow::PooledFlow p;
      p.grid_size = j.at("n").get<int>();
      p.values = j.at("o").get<std::vector<double>>();
      if (p.grid_size != video.pool_n || p.values.size() != expected) {
        throw FormatError(where + ": pooled feature has " + std::to_string(p.values.size()) + " values, expected " +
                          std::to_string(expected));
      }
      video.pooled[{j.at("track").get<int>(), j.at("frame").get<int>()}] = std::move(p);
    });
  }
  return video;
}

void save_split(const fs::path& root, const DatasetSplit& split) {
  auto out = open_out(root / "split.txt");
  for (const auto& name : split.train) out << "train " << name << '\n';
  for (const auto& name : split.test) out << "test " << name << '\n';
}

DatasetSplit load_split(const fs::path& root) {
  const fs::path path = root / "split.txt";
  auto in = open_in(path);
  DatasetSplit split;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto parts = text::split_whitespace(line);
    if (parts.empty()) continue;
    if (parts.size() != 2) throw FormatError(path.string() + ":" + std::to_string(line_no) + ": expected <set> <video>");
    if (parts[0] == "train") {
      split.train.emplace_back(parts[1]);
    } else if (parts[0] == "test") {
      split.test.emplace_back(parts[1]);
    } else {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": unknown set " + std::string(parts[0]));
    }
  }
  return split;
}

DatasetSplit split_videos(std::vector<std::string> names, std::uint64_t seed, double train_fraction) {
  if (!(train_fraction >= 0.0 && train_fraction <= 1.0)) throw ValidationError("train fraction must be in [0, 1]");
  Rng rng(seed);
  rng.shuffle(std::span<std::string>(names));
  const auto n_train = static_cast<std::size_t>(std::lround(train_fraction * static_cast<double>(names.size())));
  DatasetSplit split;
  split.train.assign(names.begin(), names.begin() + static_cast<std::ptrdiff_t>(n_train));
  split.test.assign(names.begin() + static_cast<std::ptrdiff_t>(n_train), names.end());
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

std::vector<std::string> generate_dataset(const fs::path& root, const std::vector<Scenario>& scenarios,
                                          std::uint64_t seed, const GenerateOptions& options) {
  std::set<std::string> seen;
  for (const auto& s : scenarios) {
    if (!seen.insert(s.name).second) throw ValidationError("duplicate scenario name " + s.name);
  }
  fs::create_directories(root);
  Rng master(seed);
  const std::uint64_t split_seed = master.next();
  std::vector<std::string> names;
  for (const auto& s : scenarios) {
    GeneratedVideo g = generate_scenario(s, master.next());
    // Pool what the flow files will hold, so re-pooling from disk reproduces it.
    for (auto& grid : g.video.flow) {
      for (double& x : grid.data) x = static_cast<float>(x);
    }
    if (options.pool) pool_video(g.video, options.roi_expand, options.pool_n);
    save_video(root / s.name, g.video, options.tau, options.delta);
    names.push_back(s.name);
  }
  save_split(root, split_videos(names, split_seed));
  return names;
}

void pool_dataset(const fs::path& root, double expand, int n) {
  std::vector<std::string> names;
  if (fs::exists(root / "split.txt")) {
    const auto split = load_split(root);
    names = split.train;
    names.insert(names.end(), split.test.begin(), split.test.end());
  } else {
    for (const auto& entry : fs::directory_iterator(root)) {
      if (entry.is_directory() && fs::exists(entry.path() / "meta")) names.push_back(entry.path().filename().string());
    }
  }
  std::sort(names.begin(), names.end());
  for (const auto& name : names) {
    Video video = load_video(root / name, true);
    pool_video(video, expand, n);
    save_pooled(root / name, video);
  }
}

std::vector<Sample> load_samples(const fs::path& root, const std::vector<std::string>& videos, int tau, int delta,
                                 WindowStats* stats) {
  std::vector<Sample> out;
  for (const auto& name : videos) {
    const Video video = load_video(root / name, false);
    for (auto& s : video_samples(video, tau, delta, stats)) {
      s.id = out.size();
      out.push_back(std::move(s));
    }
  }
  return out;
}

void write_dataset(const std::vector<Sample>& samples, const fs::path& path) {
  auto out = open_out(path);
  for (const auto& s : samples) {
    json j;
    j["id"] = s.id;
    j["video"] = s.video;
    j["track"] = s.track;
    j["start_frame"] = s.start_frame;
    j["width"] = s.image.width;
    j["height"] = s.image.height;
    auto boxes = [](const std::vector<BoundingBox>& v) {
      json a = json::array();
      for (const auto& b : v) a.push_back({b.cx, b.cy, b.w, b.h});
      return a;
    };
    j["past"] = boxes(s.past);
    j["future"] = boxes(s.future);
    json ego = json::array();
    for (const auto& e : s.ego) ego.push_back({e.yaw, e.x, e.z});
    j["ego"] = std::move(ego);
    json flow = json::array();
    for (const auto& f : s.flow) {
      std::vector<double> rounded(f.values.size());
      std::transform(f.values.begin(), f.values.end(), rounded.begin(),
                     [](double v) { return static_cast<double>(static_cast<float>(v)); });
      flow.push_back({{"n", f.grid_size}, {"o", rounded}});
    }
    j["flow"] = std::move(flow);
    out << j.dump() << '\n';
  }
}

namespace {

std::vector<Sample> read_samples_file(const fs::path& path) {
  std::vector<Sample> samples;
  for_each_json_line(path, [&](const json& j, const std::string& where) {
    Sample s;
    s.id = j.at("id").get<std::size_t>();
    s.video = j.at("video").get<std::string>();
    s.track = j.at("track").get<int>();
    s.start_frame = j.at("start_frame").get<int>();
    s.image = {j.at("width").get<int>(), j.at("height").get<int>()};
    auto boxes = [&](const json& a) {
      std::vector<BoundingBox> v;
      for (const auto& b : a) {
        const auto arr = b.get<std::array<double, 4>>();
        v.push_back(BoundingBox::from_array(arr));
      }
      return v;
    };
    s.past = boxes(j.at("past"));
    s.future = boxes(j.at("future"));
    for (const auto& e : j.at("ego")) {
      const auto arr = e.get<std::array<double, 3>>();
      s.ego.push_back({arr[0], arr[1], arr[2]});
    }
    for (const auto& f : j.at("flow")) {
      flow::PooledFlow p;
      p.grid_size = f.at("n").get<int>();
      p.values = f.at("o").get<std::vector<double>>();
      if (p.grid_size < 1 || p.values.size() != 2 * static_cast<std::size_t>(p.grid_size) * p.grid_size) {
        throw FormatError(where + ": pooled flow shape does not match n");
      }
      s.flow.push_back(std::move(p));
    }
    try {
      validate(s);
    } catch (const ValidationError& e) {
      throw FormatError(where + ": " + e.what());
    }
    samples.push_back(std::move(s));
  });
  return samples;
}

}  // namespace

std::vector<Sample> read_dataset(const fs::path& path, int tau, int delta) {
  if (fs::is_regular_file(path)) return read_samples_file(path);
  if (fs::is_regular_file(path / "samples.jsonl")) return read_samples_file(path / "samples.jsonl");
  if (!fs::is_directory(path)) throw FormatError("no dataset at " + path.string());
  std::vector<std::string> names;
  if (fs::exists(path / "split.txt")) {
    const auto split = load_split(path);
    names = split.train;
    names.insert(names.end(), split.test.begin(), split.test.end());
    std::sort(names.begin(), names.end());
  } else {
    for (const auto& entry : fs::directory_iterator(path)) {
      if (entry.is_directory() && fs::exists(entry.path() / "meta")) names.push_back(entry.path().filename().string());
    }
    std::sort(names.begin(), names.end());
  }
  return load_samples(path, names, tau, delta);
}

}  // namespace fvl::data
