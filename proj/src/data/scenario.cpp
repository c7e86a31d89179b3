#include "fvl/data/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>

#include "fvl/common/error.hpp"
#include "fvl/common/random.hpp"
#include "fvl/common/text.hpp"

namespace fvl::data {

EgoSegment Scenario::ego_at(int frame) const {
  EgoSegment current{0, 0.0, 0.0};
  for (const auto& seg : ego_plan) {
    if (seg.start_frame <= frame) current = seg;
  }
  return current;
}

void validate(const Scenario& s) {
  if (s.image.width <= 0 || s.image.height <= 0) throw ValidationError("scenario image size must be positive");
  if (!(s.fps > 0.0)) throw ValidationError("scenario fps must be positive");
  if (s.frames < 1) throw ValidationError("scenario needs at least one frame");
  if (!(s.focal > 0.0)) throw ValidationError("focal length must be positive");
  if (!(s.camera_height > 0.0)) throw ValidationError("camera height must be positive");
  if (!(s.near_clip > 0.0)) throw ValidationError("near clip must be positive");
  if (s.flow_downsample < 1 || s.image.width / s.flow_downsample < 1 || s.image.height / s.flow_downsample < 1) {
    throw ValidationError("flow downsample leaves an empty grid");
  }
  if (!(s.box_noise >= 0.0)) throw ValidationError("box noise must be non-negative");
  if (!(s.min_visible_fraction >= 0.0 && s.min_visible_fraction <= 1.0)) {
    throw ValidationError("min visible fraction must be in [0, 1]");
  }
  for (std::size_t i = 1; i < s.ego_plan.size(); ++i) {
    if (s.ego_plan[i].start_frame <= s.ego_plan[i - 1].start_frame) {
      throw ValidationError("ego segments must have increasing start frames");
    }
  }
  for (std::size_t i = 0; i < s.actors.size(); ++i) {
    const auto& a = s.actors[i];
    if (!(a.length > 0.0 && a.width > 0.0 && a.height > 0.0)) {
      throw ValidationError("actor " + std::to_string(i) + " needs a positive size");
    }
    if (!(a.speed >= 0.0)) throw ValidationError("actor " + std::to_string(i) + " has negative speed");
  }
}

namespace {

using Setter = std::function<void(const std::string& value, const std::string& where)>;

Setter real(double& field) {
  return [&field](const std::string& v, const std::string& where) { field = text::parse_double(v, where); };
}
Setter integer(int& field) {
  return [&field](const std::string& v, const std::string& where) { field = text::parse_int(v, where); };
}

}  // namespace

Scenario parse_scenario_text(const std::string& content, const std::string& source) {
  Scenario s;
  const std::map<std::string, Setter> top = {
      {"name", [&s](const std::string& v, const std::string&) { s.name = v; }},
      {"width", integer(s.image.width)},
      {"height", integer(s.image.height)},
      {"fps", real(s.fps)},
      {"frames", integer(s.frames)},
      {"focal", real(s.focal)},
      {"principal_x", real(s.principal_x)},
      {"principal_y", real(s.principal_y)},
      {"camera_height", real(s.camera_height)},
      {"near_clip", real(s.near_clip)},
      {"min_box_size", real(s.min_box_size)},
      {"min_visible_fraction", real(s.min_visible_fraction)},
      {"flow_downsample", integer(s.flow_downsample)},
      {"box_noise", real(s.box_noise)},
  };

  std::istringstream in(content);
  std::string line;
  std::size_t line_no = 0;
  ActorSpec* actor = nullptr;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string where = source + ":" + std::to_string(line_no);
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = text::trim(view);
    if (view.empty()) continue;
    if (view == "[actor]") {
      actor = &s.actors.emplace_back();
      continue;
    }
    if (view.front() == '[') throw FormatError(where + ": unknown section " + std::string(view));
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) throw FormatError(where + ": expected key=value");
    const std::string key(text::trim(view.substr(0, eq)));
    const std::string value(text::trim(view.substr(eq + 1)));
    if (actor != nullptr) {
      const std::map<std::string, double*> fields = {
          {"x", &actor->x},           {"y", &actor->y},         {"heading", &actor->heading},
          {"speed", &actor->speed},   {"accel", &actor->accel}, {"yaw_rate", &actor->yaw_rate},
          {"length", &actor->length}, {"width", &actor->width}, {"height", &actor->height},
      };
      const auto it = fields.find(key);
      if (it == fields.end()) throw FormatError(where + ": unknown actor key " + key);
      *it->second = text::parse_double(value, where);
      continue;
    }
    if (key == "ego") {
      const auto parts = text::split_whitespace(value);
      if (parts.size() != 3) throw FormatError(where + ": ego needs <start_frame> <yaw_rate> <speed>");
      s.ego_plan.push_back({text::parse_int(parts[0], where), text::parse_double(parts[1], where),
                            text::parse_double(parts[2], where)});
      continue;
    }
    const auto it = top.find(key);
    if (it == top.end()) throw FormatError(where + ": unknown key " + key);
    it->second(value, where);
  }
  try {
    validate(s);
  } catch (const ValidationError& e) {
    throw FormatError(source + ": " + e.what());
  }
  return s;
}

Scenario parse_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open scenario " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario_text(buffer.str(), path.string());
}

std::string format_scenario(const Scenario& s) {
  std::ostringstream out;
  const auto d = [](double v) { return text::format_double(v); };
  out << "name=" << s.name << '\n'
      << "width=" << s.image.width << '\n'
      << "height=" << s.image.height << '\n'
      << "fps=" << d(s.fps) << '\n'
      << "frames=" << s.frames << '\n'
      << "focal=" << d(s.focal) << '\n'
      << "principal_x=" << d(s.principal_x) << '\n'
      << "principal_y=" << d(s.principal_y) << '\n'
      << "camera_height=" << d(s.camera_height) << '\n'
      << "near_clip=" << d(s.near_clip) << '\n'
      << "min_box_size=" << d(s.min_box_size) << '\n'
      << "min_visible_fraction=" << d(s.min_visible_fraction) << '\n'
      << "flow_downsample=" << s.flow_downsample << '\n'
      << "box_noise=" << d(s.box_noise) << '\n';
  for (const auto& seg : s.ego_plan) {
    out << "ego=" << seg.start_frame << ' ' << d(seg.yaw_rate) << ' ' << d(seg.speed) << '\n';
  }
  for (const auto& a : s.actors) {
    out << "[actor]\n"
        << "x=" << d(a.x) << "\ny=" << d(a.y) << "\nheading=" << d(a.heading) << "\nspeed=" << d(a.speed)
        << "\naccel=" << d(a.accel) << "\nyaw_rate=" << d(a.yaw_rate) << "\nlength=" << d(a.length)
        << "\nwidth=" << d(a.width) << "\nheight=" << d(a.height) << '\n';
  }
  return out.str();
}

std::vector<Scenario> turn_heavy_suite(const SuiteOptions& options, std::uint64_t seed) {
  constexpr double pi = std::numbers::pi;
  Rng rng(seed);
  std::vector<Scenario> suite;
  suite.reserve(options.count);
  for (int v = 0; v < options.count; ++v) {
    Scenario s;
    char name[32];
    std::snprintf(name, sizeof(name), "video_%04d", v);
    s.name = name;
    s.frames = options.frames;
    s.box_noise = options.box_noise;
    s.min_visible_fraction = options.min_visible_fraction;
    s.flow_downsample = options.flow_downsample;

    const double ego_speed = rng.uniform(3.0, 9.0);
    int frame = 0;
    while (frame < s.frames) {
      const bool turning = rng.uniform() < 0.75;
      const double yaw = turning ? rng.uniform(-options.max_yaw_rate, options.max_yaw_rate) : 0.0;
      const double speed = std::max(0.0, ego_speed + rng.uniform(-2.0, 2.0));
      s.ego_plan.push_back({frame, yaw, speed});
      frame += options.min_segment +
               static_cast<int>(rng.below(static_cast<std::uint64_t>(options.max_segment - options.min_segment + 1)));
    }

    const int actors = 4 + static_cast<int>(rng.below(3));
    for (int k = 0; k < actors; ++k) {
      ActorSpec a;
      switch (rng.below(4)) {
        case 0: {  // crossing
          const double side = rng.uniform() < 0.5 ? -1.0 : 1.0;
          a.x = rng.uniform(12.0, 35.0);
          a.y = side * rng.uniform(4.0, 16.0);
          a.heading = -side * pi / 2.0 + rng.uniform(-0.2, 0.2);
          a.speed = rng.uniform(2.0, 8.0);
          break;
        }
        case 1:  // oncoming
          a.x = rng.uniform(20.0, 45.0);
          a.y = rng.uniform(2.5, 5.0);
          a.heading = pi + rng.uniform(-0.1, 0.1);
          a.speed = rng.uniform(2.0, 8.0);
          break;
        case 2:  // leading
          a.x = rng.uniform(8.0, 20.0);
          a.y = rng.uniform(-1.0, 1.0);
          a.heading = rng.uniform(-0.1, 0.1);
          a.speed = std::max(0.0, ego_speed + rng.uniform(-2.0, 2.0));
          break;
        default:  // parked at the roadside
          a.x = rng.uniform(10.0, 35.0);
          a.y = (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(3.0, 7.0);
          a.heading = rng.uniform() < 0.5 ? 0.0 : pi;
          a.speed = 0.0;
          break;
      }
      if (a.speed > 0.0) {
        a.accel = rng.uniform(-1.5, 1.5);
        a.yaw_rate = rng.uniform() < 0.3 ? rng.uniform(-0.3, 0.3) : 0.0;
      }
      a.length = rng.uniform(3.8, 5.2);
      a.width = rng.uniform(1.6, 2.0);
      a.height = rng.uniform(1.3, 1.9);
      s.actors.push_back(a);
    }
    suite.push_back(std::move(s));
  }
  return suite;
}

}  // namespace fvl::data
