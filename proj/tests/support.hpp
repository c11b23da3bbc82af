#pragma once

#include "aerotrack/detector.hpp"
#include "aerotrack/imaging.hpp"
#include "aerotrack/rng.hpp"

#include <Eigen/Core>

#include <cmath>
#include <deque>
#include <filesystem>
#include <string>

namespace aerotrack::fixtures {

/// Smooth static texture: sum of a few random low-frequency sinusoids, scaled into [0.2, 0.8].
inline Image smooth_texture(int w, int h, std::uint64_t seed) {
  Rng rng = make_stream(seed, "texture");
  Image img = Image::Zero(h, w);
  for (int k = 0; k < 6; ++k) {
    const double fu = 0.02 + 0.08 * uniform01(rng), fv = 0.02 + 0.08 * uniform01(rng);
    const double phase = 6.283185307179586 * uniform01(rng);
    for (int r = 0; r < h; ++r)
      for (int c = 0; c < w; ++c) img(r, c) += std::sin(fu * c + fv * r + phase);
  }
  const double lo = img.minCoeff(), hi = img.maxCoeff();
  return 0.2 + 0.6 * (img - lo) / (hi - lo);
}

/// Dark target blob with a bright core drawn over `background`, centered at (u, v).
inline Frame frame_with_target(const Image& background, double u, double v, double radius, std::uint64_t tick) {
  Image img = background;
  for (int r = 0; r < img.rows(); ++r)
    for (int c = 0; c < img.cols(); ++c) {
      const double du = (c - u) / radius, dv = (r - v) / radius;
      const double q = du * du + dv * dv;
      if (q <= 1.0) img(r, c) = q < 0.25 ? 0.9 : 0.05;
    }
  return Frame(img, tick);
}

/// Detector that replays a script, one entry per call, then reports nothing.
class ScriptedDetector final : public Detector {
 public:
  void push(const Detection& d) { script_.push_back(d); }
  void push_box(const BoundingBox& b, double confidence = 0.9) { script_.push_back({b, confidence}); }
  void push_miss() { script_.push_back({}); }
  Detection detect(const Frame&) override {
    ++calls;
    if (script_.empty()) return {};
    Detection d = script_.front();
    script_.pop_front();
    return d;
  }
  int calls = 0;

 private:
  std::deque<Detection> script_;
};

/// Detector that always reports a fixed-size box centered on a moving truth.
class FollowDetector final : public Detector {
 public:
  explicit FollowDetector(double size) : size_(size) {}
  void set(std::optional<PixelPoint> center) { center_ = center; }
  Detection detect(const Frame&) override {
    ++calls;
    if (!center_) return {};
    return {BoundingBox::centered(*center_, size_, size_), 0.9};
  }
  int calls = 0;

 private:
  double size_;
  std::optional<PixelPoint> center_;
};

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("aerotrack_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace aerotrack::fixtures
