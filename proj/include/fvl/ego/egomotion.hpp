#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace fvl::ego {

using Vec2 = std::array<double, 2>;

// Row-major 2 x 2 matrix: m[row][col].
struct Rotation2 {
  std::array<std::array<double, 2>, 2> m{{{1.0, 0.0}, {0.0, 1.0}}};

  static Rotation2 from_yaw(double yaw);
  double yaw() const;
  Rotation2 operator*(const Rotation2& other) const;
  Vec2 operator*(const Vec2& v) const;
  Rotation2 transpose() const;
  bool operator==(const Rotation2&) const = default;
};

// det = +1 and R^T R = I within `tolerance`.
bool is_orthonormal(const Rotation2& r, double tolerance = 1e-9);

// Relative pose of frame t+1 in the coordinates of frame t: heading along +x,
// second axis to the left, meters.
struct EgoStep {
  Rotation2 rotation;
  Vec2 translation{0.0, 0.0};
};

// Pose of frame t expressed in frame t0. `z` is the second planar axis.
struct EgoFeature {
  double yaw = 0.0;
  double x = 0.0;
  double z = 0.0;

  std::array<double, 3> as_array() const { return {yaw, x, z}; }
  bool operator==(const EgoFeature&) const = default;
};

// Accumulated transform from frame t0 to frame t0 + i.
struct Pose2 {
  Rotation2 rotation;
  Vec2 translation{0.0, 0.0};
};

// Angle mapped into (-pi, pi].
double wrap_angle(double angle);

// Chains steps in time order:
//   R_i = R_{i-1} * step_i.rotation
//   T_i = T_{i-1} + R_{i-1} * step_i.translation
// Returns poses for i = 1..steps.size(). Throws ValidationError naming the
// first non-orthonormal step.
std::vector<Pose2> accumulate(std::span<const EgoStep> steps);

// Yaw = atan2(R[1][0], R[0][0]) of each accumulated pose, plus translation.
std::vector<EgoFeature> compose(std::span<const EgoStep> steps);

// Planar rotation by `yaw_rate` (rad/frame) and forward translation `speed`
// (m/frame).
EgoStep yaw_to_step(double yaw_rate, double speed);

// One line of the ego log: `frame_index yaw_rate_rad translation_x_m translation_y_m`.
// Line k holds the step from frame k to frame k + 1.
struct EgoLogEntry {
  int frame = 0;
  double yaw_rate = 0.0;
  double tx = 0.0;
  double ty = 0.0;

  EgoStep to_step() const;
  bool operator==(const EgoLogEntry&) const = default;
};

void write_ego_log(std::ostream& out, std::span<const EgoLogEntry> entries);
std::vector<EgoLogEntry> read_ego_log(std::istream& in, const std::string& source = "<stream>");
void save_ego_log(const std::filesystem::path& path, std::span<const EgoLogEntry> entries);
std::vector<EgoLogEntry> load_ego_log(const std::filesystem::path& path);

}  // namespace fvl::ego
