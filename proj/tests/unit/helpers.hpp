#pragma once

#include <unistd.h>

#include <filesystem>
#include <string>
#include <vector>

#include "fvl/common/random.hpp"
#include "fvl/data/sample.hpp"
#include "fvl/geometry/box.hpp"

namespace fvl::test {

inline BoundingBox random_box(Rng& rng, const ImageSize& image = {}) {
  const double w = rng.uniform(10.0, 200.0);
  const double h = rng.uniform(10.0, 150.0);
  return {rng.uniform(w / 2, image.width - w / 2), rng.uniform(h / 2, image.height - h / 2), w, h};
}

// Box track following c0 + c1 t + c2 t^2 per coordinate.
inline std::vector<BoundingBox> poly_track(const BoundingBox& start, const BoundingBox& velocity,
                                           const BoundingBox& accel, int begin, int count) {
  std::vector<BoundingBox> out;
  for (int t = begin; t < begin + count; ++t) {
    const double tt = 0.5 * t * t;
    out.push_back({start.cx + velocity.cx * t + accel.cx * tt, start.cy + velocity.cy * t + accel.cy * tt,
                   start.w + velocity.w * t + accel.w * tt, start.h + velocity.h * t + accel.h * tt});
  }
  return out;
}

// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("fvl_test_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace fvl::test
