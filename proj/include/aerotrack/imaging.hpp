#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

namespace aerotrack {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Row-major real matrix; rows are image rows (v), columns image columns (u).
using Image = Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct PixelPoint {
  double u = 0.0;  // column
  double v = 0.0;  // row

  friend bool operator==(const PixelPoint&, const PixelPoint&) = default;
};

inline PixelPoint operator+(PixelPoint a, PixelPoint b) { return {a.u + b.u, a.v + b.v}; }
inline PixelPoint operator-(PixelPoint a, PixelPoint b) { return {a.u - b.u, a.v - b.v}; }
double distance(PixelPoint a, PixelPoint b);

/// Axis-aligned pixel rectangle. The all-zeros box is the "no detection" sentinel.
struct BoundingBox {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  static constexpr BoundingBox sentinel() { return {}; }
  static BoundingBox centered(PixelPoint c, double w, double h) {
    return {c.u - w / 2, c.v - h / 2, c.u + w / 2, c.v + h / 2};
  }

  bool is_sentinel() const { return x_min == 0.0 && y_min == 0.0 && x_max == 0.0 && y_max == 0.0; }
  bool is_valid() const { return !is_sentinel() && x_min <= x_max && y_min <= y_max; }
  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

/// Midpoint of a box. Throws on the sentinel.
PixelPoint bbox_center(const BoundingBox& box);

/// Grayscale frame with intensities in [0, 1] and the simulation tick it was captured at.
class Frame {
 public:
  Frame(Image pixels, std::uint64_t tick);

  int width() const { return static_cast<int>(pixels_.cols()); }
  int height() const { return static_cast<int>(pixels_.rows()); }
  std::uint64_t tick() const { return tick_; }
  const Image& pixels() const { return pixels_; }
  double at(int row, int col) const { return pixels_(row, col); }

 private:
  Image pixels_;
  std::uint64_t tick_;
};

/// Forward-looking pinhole camera rigidly mounted at the chaser body origin.
struct CameraModel {
  int width = 320;
  int height = 240;
  double focal_px = 160.0;  // 90 degree horizontal field of view at 320 px

  double cx() const { return width / 2.0; }
  double cy() const { return height / 2.0; }
  PixelPoint principal_point() const { return {cx(), cy()}; }
  double diagonal() const;
  void validate() const;
};

/// Chaser position in the z-up world frame and heading (yaw, counter-clockwise from +x).
struct Pose {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  double yaw = 0.0;
};

/// Point expressed in the chaser body frame: x forward, y right, z down.
Eigen::Vector3d world_to_body(const Pose& pose, const Eigen::Vector3d& world_point);
Eigen::Vector3d body_to_world_direction(double yaw, const Eigen::Vector3d& body_vector);

/// Pinhole projection. Absent when the point is behind the camera or lands outside the image.
std::optional<PixelPoint> project(const CameraModel& camera, const Pose& chaser,
                                  const Eigen::Vector3d& world_point);

/// Same projection without the in-frame test; absent only when behind the camera.
std::optional<PixelPoint> project_unbounded(const CameraModel& camera, const Pose& chaser,
                                            const Eigen::Vector3d& world_point);

bool in_frame(const CameraModel& camera, PixelPoint p);

/// w x h patch whose index (h/2, w/2) sits on round(center); out-of-frame pixels replicate the edge.
Image crop_window(const Frame& frame, PixelPoint center, int w, int h);

// Binary 8-bit PGM (P5). Frames are stored as frame_<tick>.pgm.
std::string frame_filename(std::uint64_t tick);
std::optional<std::uint64_t> tick_from_filename(const std::string& filename);
void write_pgm(const std::filesystem::path& path, const Frame& frame);
Frame read_pgm(const std::filesystem::path& path);

}  // namespace aerotrack
