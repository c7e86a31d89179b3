#include "fvl/ego/egomotion.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "fvl/common/error.hpp"
#include "fvl/common/text.hpp"

namespace fvl::ego {

Rotation2 Rotation2::from_yaw(double yaw) {
  const double c = std::cos(yaw);
  const double s = std::sin(yaw);
  Rotation2 r;
  r.m = {{{c, -s}, {s, c}}};
  return r;
}

double Rotation2::yaw() const { return wrap_angle(std::atan2(m[1][0], m[0][0])); }

Rotation2 Rotation2::operator*(const Rotation2& o) const {
  Rotation2 r;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) r.m[i][j] = m[i][0] * o.m[0][j] + m[i][1] * o.m[1][j];
  return r;
}

Vec2 Rotation2::operator*(const Vec2& v) const {
  return {m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]};
}

Rotation2 Rotation2::transpose() const {
  Rotation2 r;
  r.m = {{{m[0][0], m[1][0]}, {m[0][1], m[1][1]}}};
  return r;
}

bool is_orthonormal(const Rotation2& r, double tolerance) {
  const auto& m = r.m;
  const double det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
  const double c00 = m[0][0] * m[0][0] + m[1][0] * m[1][0];
  const double c11 = m[0][1] * m[0][1] + m[1][1] * m[1][1];
  const double c01 = m[0][0] * m[0][1] + m[1][0] * m[1][1];
  return std::abs(det - 1.0) <= tolerance && std::abs(c00 - 1.0) <= tolerance &&
         std::abs(c11 - 1.0) <= tolerance && std::abs(c01) <= tolerance;
}

double wrap_angle(double angle) {
  constexpr double pi = std::numbers::pi;
  double a = std::remainder(angle, 2.0 * pi);
  if (a <= -pi) a += 2.0 * pi;
  return a;
}

std::vector<Pose2> accumulate(std::span<const EgoStep> steps) {
  std::vector<Pose2> poses;
  poses.reserve(steps.size());
  Pose2 current;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (!is_orthonormal(steps[i].rotation)) {
      throw ValidationError("ego step " + std::to_string(i) + " has a non-orthonormal rotation");
    }
    const Vec2 moved = current.rotation * steps[i].translation;
    current.translation = {current.translation[0] + moved[0], current.translation[1] + moved[1]};
    current.rotation = current.rotation * steps[i].rotation;
    poses.push_back(current);
  }
  return poses;
}

std::vector<EgoFeature> compose(std::span<const EgoStep> steps) {
  const auto poses = accumulate(steps);
  std::vector<EgoFeature> features;
  features.reserve(poses.size());
  for (const auto& p : poses) features.push_back({p.rotation.yaw(), p.translation[0], p.translation[1]});
  return features;
}

EgoStep yaw_to_step(double yaw_rate, double speed) {
  return {Rotation2::from_yaw(yaw_rate), {speed, 0.0}};
}

EgoStep EgoLogEntry::to_step() const { return {Rotation2::from_yaw(yaw_rate), {tx, ty}}; }

void write_ego_log(std::ostream& out, std::span<const EgoLogEntry> entries) {
  for (const auto& e : entries) {
    out << e.frame << ' ' << text::format_double(e.yaw_rate) << ' ' << text::format_double(e.tx) << ' '
        << text::format_double(e.ty) << '\n';
  }
}

std::vector<EgoLogEntry> read_ego_log(std::istream& in, const std::string& source) {
  std::vector<EgoLogEntry> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = text::split_whitespace(line);
    if (fields.empty()) continue;
    const std::string where = source + ":" + std::to_string(line_no);
    if (fields.size() != 4) throw FormatError(where + ": expected 4 fields, got " + std::to_string(fields.size()));
    EgoLogEntry e;
    e.frame = text::parse_int(fields[0], where);
    e.yaw_rate = text::parse_double(fields[1], where);
    e.tx = text::parse_double(fields[2], where);
    e.ty = text::parse_double(fields[3], where);
    if (!entries.empty() && e.frame != entries.back().frame + 1) {
      throw FormatError(where + ": frame indices must be consecutive");
    }
    entries.push_back(e);
  }
  return entries;
}

void save_ego_log(const std::filesystem::path& path, std::span<const EgoLogEntry> entries) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  write_ego_log(out, entries);
}

std::vector<EgoLogEntry> load_ego_log(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return read_ego_log(in, path.string());
}

}  // namespace fvl::ego
