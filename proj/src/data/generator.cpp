#include "fvl/data/generator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>

#include "fvl/common/error.hpp"
#include "fvl/common/random.hpp"

namespace fvl::data {

namespace {

struct ActorState {
  double x, y, heading, speed;
};

ActorState advance(const ActorState& s, const ActorSpec& spec, double dt) {
  return {s.x + s.speed * std::cos(s.heading) * dt, s.y + s.speed * std::sin(s.heading) * dt,
          s.heading + spec.yaw_rate * dt, std::max(0.0, s.speed + spec.accel * dt)};
}

ActorState rewind(const ActorState& s, const ActorSpec& spec, double dt) {
  const double heading = s.heading - spec.yaw_rate * dt;
  const double speed = std::max(0.0, s.speed - spec.accel * dt);
  return {s.x - speed * std::cos(heading) * dt, s.y - speed * std::sin(heading) * dt, heading, speed};
}

struct Camera {
  const Scenario& s;

  // World ground point (x, y, up) -> camera coordinates at pose.
  std::array<double, 3> to_camera(const ego::Pose2& pose, double x, double y, double up) const {
    const ego::Vec2 rel{x - pose.translation[0], y - pose.translation[1]};
    const ego::Vec2 q = pose.rotation.transpose() * rel;
    return {-q[1], s.camera_height - up, q[0]};
  }
};

struct Projected {
  BoundingBox box;
  double depth;
};

std::optional<Projected> project_actor(const Camera& cam, const ego::Pose2& pose, const ActorState& a,
                                       const ActorSpec& spec) {
  const Scenario& s = cam.s;
  const double c = std::cos(a.heading);
  const double sn = std::sin(a.heading);
  double u0 = std::numeric_limits<double>::infinity();
  double v0 = u0;
  double u1 = -u0;
  double v1 = -u0;
  for (int i = 0; i < 8; ++i) {
    const double fl = (i & 1 ? 0.5 : -0.5) * spec.length;
    const double lat = (i & 2 ? 0.5 : -0.5) * spec.width;
    const double up = i & 4 ? spec.height : 0.0;
    const auto p = cam.to_camera(pose, a.x + fl * c - lat * sn, a.y + fl * sn + lat * c, up);
    if (p[2] < s.near_clip) return std::nullopt;
    const double u = s.focal * p[0] / p[2] + s.principal_x;
    const double v = s.focal * p[1] / p[2] + s.principal_y;
    u0 = std::min(u0, u);
    u1 = std::max(u1, u);
    v0 = std::min(v0, v);
    v1 = std::max(v1, v);
  }
  const double full_area = (u1 - u0) * (v1 - v0);
  u0 = std::max(u0, 0.0);
  v0 = std::max(v0, 0.0);
  u1 = std::min(u1, static_cast<double>(s.image.width));
  v1 = std::min(v1, static_cast<double>(s.image.height));
  if (u1 - u0 < s.min_box_size || v1 - v0 < s.min_box_size) return std::nullopt;
  if ((u1 - u0) * (v1 - v0) < s.min_visible_fraction * full_area) return std::nullopt;
  return Projected{BoundingBox::from_corners(u0, v0, u1, v1), cam.to_camera(pose, a.x, a.y, 0.0)[2]};
}

// Image motion of the static scene point seen at pixel (u, v) in the current
// frame, from the previous frame to the current one.
struct FrameMotion {
  ego::Rotation2 now;          // current camera -> world
  ego::Rotation2 before_inv;   // world -> previous camera
  ego::Rotation2 back;         // current camera -> previous camera
  ego::Vec2 shift;             // current origin minus previous origin, world
  bool still;                  // identical poses; reprojection would only add roundoff

  FrameMotion(const ego::Pose2& current, const ego::Pose2& previous)
      : now(current.rotation),
        before_inv(previous.rotation.transpose()),
        back(before_inv * current.rotation),
        shift{current.translation[0] - previous.translation[0], current.translation[1] - previous.translation[1]},
        still(current.rotation == previous.rotation && current.translation == previous.translation) {}
};

std::array<double, 2> background_flow(const Scenario& s, const FrameMotion& m, double u, double v) {
  if (m.still) return {0.0, 0.0};
  const double dx = (u - s.principal_x) / s.focal;
  const double dy = (v - s.principal_y) / s.focal;
  double pu;
  double pv;
  if (dy > 1e-6) {
    // Ground plane hit at range camera_height / dy.
    const double range = s.camera_height / dy;
    const ego::Vec2 q{range, -dx * range};
    const ego::Vec2 world = m.now * q;
    const ego::Vec2 qb = m.before_inv * ego::Vec2{world[0] + m.shift[0], world[1] + m.shift[1]};
    if (qb[0] < 1e-3) return {0.0, 0.0};
    pu = s.focal * (-qb[1]) / qb[0] + s.principal_x;
    pv = s.focal * s.camera_height / qb[0] + s.principal_y;
  } else {
    // At or above the horizon: treat as infinitely far, only rotation moves it.
    const ego::Vec2 qb = m.back * ego::Vec2{1.0, -dx};
    if (qb[0] < 1e-6) return {0.0, 0.0};
    pu = s.focal * (-qb[1]) / qb[0] + s.principal_x;
    pv = s.focal * dy / qb[0] + s.principal_y;
  }
  return {u - pu, v - pv};
}

}  // namespace

GeneratedVideo generate_scenario(const Scenario& scenario, std::uint64_t seed) {
  validate(scenario);
  const Scenario& s = scenario;
  const double dt = 1.0 / s.fps;
  const Camera cam{s};
  GeneratedVideo out;
  Video& video = out.video;
  video.name = s.name;
  video.image = s.image;
  video.fps = s.fps;
  video.frames = s.frames;

  // Ego: log entry t moves the camera from frame t to t + 1.
  std::vector<ego::EgoStep> steps;
  for (int t = 0; t < s.frames; ++t) {
    const EgoSegment seg = s.ego_at(t);
    const auto step = ego::yaw_to_step(seg.yaw_rate * dt, seg.speed * dt);
    steps.push_back(step);
    video.ego.push_back({t, seg.yaw_rate * dt, step.translation[0], step.translation[1]});
  }
  out.camera_poses.push_back({});
  if (s.frames > 1) {
    const auto poses = ego::accumulate(std::span(steps).first(s.frames - 1));
    out.camera_poses.insert(out.camera_poses.end(), poses.begin(), poses.end());
  }
  const EgoSegment first = s.ego_at(0);
  const auto warm = ego::yaw_to_step(first.yaw_rate * dt, first.speed * dt);
  ego::Pose2 warm_pose;
  warm_pose.rotation = warm.rotation.transpose();
  const ego::Vec2 back = warm_pose.rotation * warm.translation;
  warm_pose.translation = {-back[0], -back[1]};

  // Actor states for frames -1 .. frames-1.
  const std::size_t n_actors = s.actors.size();
  std::vector<std::vector<ActorState>> states(n_actors);
  for (std::size_t k = 0; k < n_actors; ++k) {
    const auto& spec = s.actors[k];
    const ActorState at0{spec.x, spec.y, spec.heading, spec.speed};
    states[k].push_back(rewind(at0, spec, dt));
    states[k].push_back(at0);
    for (int t = 1; t < s.frames; ++t) states[k].push_back(advance(states[k].back(), spec, dt));
  }

  const int gw = s.image.width / s.flow_downsample;
  const int gh = s.image.height / s.flow_downsample;
  const double cell_w = static_cast<double>(s.image.width) / gw;
  const double cell_h = static_cast<double>(s.image.height) / gh;
  Rng rng(seed);

  std::vector<std::optional<Projected>> previous(n_actors);
  for (std::size_t k = 0; k < n_actors; ++k) {
    previous[k] = project_actor(cam, warm_pose, states[k][0], s.actors[k]);
  }
  const ego::Pose2* pose_before = &warm_pose;
  for (int t = 0; t < s.frames; ++t) {
    const ego::Pose2& pose = out.camera_poses[t];
    std::vector<std::optional<Projected>> current(n_actors);
    for (std::size_t k = 0; k < n_actors; ++k) {
      current[k] = project_actor(cam, pose, states[k][t + 1], s.actors[k]);
    }

    // Nearest actor first so the first containing box wins.
    std::vector<std::size_t> order;
    for (std::size_t k = 0; k < n_actors; ++k) {
      if (current[k]) order.push_back(k);
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return current[a]->depth < current[b]->depth; });
    std::vector<std::array<double, 2>> motion(n_actors, {0.0, 0.0});
    for (std::size_t k : order) {
      if (previous[k]) {
        motion[k] = {current[k]->box.cx - previous[k]->box.cx, current[k]->box.cy - previous[k]->box.cy};
      }
    }

    const FrameMotion motion_bg(pose, *pose_before);
    flow::FlowGrid grid(gw, gh);
    for (int gy = 0; gy < gh; ++gy) {
      const double v = (gy + 0.5) * cell_h;
      for (int gx = 0; gx < gw; ++gx) {
        const double u = (gx + 0.5) * cell_w;
        bool hit = false;
        for (std::size_t k : order) {
          const BoundingBox& b = current[k]->box;
          if (u >= b.left() && u < b.right() && v >= b.top() && v < b.bottom()) {
            grid.set(gx, gy, motion[k][0], motion[k][1]);
            hit = true;
            break;
          }
        }
        if (!hit) {
          const auto f = background_flow(s, motion_bg, u, v);
          grid.set(gx, gy, f[0], f[1]);
        }
      }
    }
    video.flow.push_back(std::move(grid));

    for (std::size_t k = 0; k < n_actors; ++k) {
      if (!current[k]) continue;
      const BoundingBox clean = current[k]->box;
      BoundingBox noisy = clean;
      if (s.box_noise > 0.0) {
        const double x0 = std::clamp(clean.left() + s.box_noise * rng.normal(), 0.0, 1.0 * s.image.width);
        const double y0 = std::clamp(clean.top() + s.box_noise * rng.normal(), 0.0, 1.0 * s.image.height);
        const double x1 = std::clamp(clean.right() + s.box_noise * rng.normal(), 0.0, 1.0 * s.image.width);
        const double y1 = std::clamp(clean.bottom() + s.box_noise * rng.normal(), 0.0, 1.0 * s.image.height);
        noisy = BoundingBox::from_corners(std::min(x0, x1), std::min(y0, y1), std::max(x0, x1), std::max(y0, y1));
        if (noisy.w < 1.0 || noisy.h < 1.0) noisy = clean;
      }
      const int track = static_cast<int>(k);
      video.boxes.push_back({t, track, noisy});
      out.clean_boxes.push_back({t, track, clean});
    }
    previous = std::move(current);
    pose_before = &pose;
  }
  return out;
}

}  // namespace fvl::data
