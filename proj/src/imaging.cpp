#include "aerotrack/imaging.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <regex>
#include <vector>

namespace aerotrack {

double distance(PixelPoint a, PixelPoint b) { return std::hypot(a.u - b.u, a.v - b.v); }

PixelPoint bbox_center(const BoundingBox& box) {
  if (box.is_sentinel()) throw Error("invalid box");
  return {(box.x_min + box.x_max) / 2.0, (box.y_min + box.y_max) / 2.0};
}

Frame::Frame(Image pixels, std::uint64_t tick) : pixels_(std::move(pixels)), tick_(tick) {
  if (pixels_.size() == 0) throw Error("frame must have positive width and height");
  if (!(pixels_.minCoeff() >= 0.0 && pixels_.maxCoeff() <= 1.0))
    throw Error("frame intensities must lie in [0, 1]");
}

double CameraModel::diagonal() const {
  return std::hypot(static_cast<double>(width), static_cast<double>(height));
}

void CameraModel::validate() const {
  if (width <= 0 || height <= 0) throw Error("camera resolution must be positive");
  if (!(focal_px > 0.0) || !std::isfinite(focal_px)) throw Error("focal_px must be positive");
}

Eigen::Vector3d world_to_body(const Pose& pose, const Eigen::Vector3d& world_point) {
  const Eigen::Vector3d rel = world_point - pose.position;
  const double c = std::cos(pose.yaw);
  const double s = std::sin(pose.yaw);
  const double forward = c * rel.x() + s * rel.y();
  const double left = -s * rel.x() + c * rel.y();
  return {forward, -left, -rel.z()};
}

Eigen::Vector3d body_to_world_direction(double yaw, const Eigen::Vector3d& body_vector) {
  // body (forward, right, down) -> world z-up
  const double c = std::cos(yaw);
  const double s = std::sin(yaw);
  const double forward = body_vector.x();
  const double left = -body_vector.y();
  return {c * forward - s * left, s * forward + c * left, -body_vector.z()};
}

std::optional<PixelPoint> project_unbounded(const CameraModel& camera, const Pose& chaser,
                                            const Eigen::Vector3d& world_point) {
  const Eigen::Vector3d b = world_to_body(chaser, world_point);
  if (b.x() <= 1e-9) return std::nullopt;
  return PixelPoint{camera.cx() + camera.focal_px * b.y() / b.x(),
                    camera.cy() + camera.focal_px * b.z() / b.x()};
}

bool in_frame(const CameraModel& camera, PixelPoint p) {
  return p.u >= 0.0 && p.u < camera.width && p.v >= 0.0 && p.v < camera.height;
}

std::optional<PixelPoint> project(const CameraModel& camera, const Pose& chaser,
                                  const Eigen::Vector3d& world_point) {
  auto p = project_unbounded(camera, chaser, world_point);
  if (!p || !in_frame(camera, *p)) return std::nullopt;
  return p;
}

Image crop_window(const Frame& frame, PixelPoint center, int w, int h) {
  if (w <= 0 || h <= 0) throw Error("crop size must be positive");
  const long x0 = std::lround(center.u) - w / 2;
  const long y0 = std::lround(center.v) - h / 2;
  const long max_col = frame.width() - 1;
  const long max_row = frame.height() - 1;
  Image patch(h, w);
  for (int r = 0; r < h; ++r) {
    const long fr = std::clamp(y0 + r, 0L, max_row);
    for (int c = 0; c < w; ++c) {
      const long fc = std::clamp(x0 + c, 0L, max_col);
      patch(r, c) = frame.pixels()(fr, fc);
    }
  }
  return patch;
}

std::string frame_filename(std::uint64_t tick) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "frame_%06llu.pgm", static_cast<unsigned long long>(tick));
  return buf;
}

std::optional<std::uint64_t> tick_from_filename(const std::string& filename) {
  static const std::regex pattern(R"(frame_(\d+)\.pgm)");
  std::smatch m;
  if (!std::regex_match(filename, m, pattern)) return std::nullopt;
  return std::stoull(m[1].str());
}

void write_pgm(const std::filesystem::path& path, const Frame& frame) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << "P5\n" << frame.width() << ' ' << frame.height() << "\n255\n";
  std::vector<unsigned char> bytes(static_cast<std::size_t>(frame.width()) * frame.height());
  const Image& px = frame.pixels();
  for (Eigen::Index i = 0; i < px.size(); ++i)
    bytes[static_cast<std::size_t>(i)] =
        static_cast<unsigned char>(std::lround(std::clamp(px.data()[i], 0.0, 1.0) * 255.0));
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed writing " + path.string());
}

namespace {

// Reads the next header token, skipping whitespace and '#' comments.
std::string next_token(std::istream& in) {
  std::string tok;
  char ch;
  while (in.get(ch)) {
    if (ch == '#') {
      std::string ignored;
      std::getline(in, ignored);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(ch))) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(ch);
  }
  return tok;
}

}  // namespace

Frame read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  if (next_token(in) != "P5") throw Error(path.string() + ": not a binary PGM (P5)");
  int w = 0, h = 0, maxval = 0;
  try {
    w = std::stoi(next_token(in));
    h = std::stoi(next_token(in));
    maxval = std::stoi(next_token(in));
  } catch (const std::exception&) {
    throw Error(path.string() + ": malformed PGM header");
  }
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 255)
    throw Error(path.string() + ": unsupported PGM dimensions or depth");
  std::vector<unsigned char> bytes(static_cast<std::size_t>(w) * h);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (in.gcount() != static_cast<std::streamsize>(bytes.size()))
    throw Error(path.string() + ": truncated PGM data");
  Image px(h, w);
  for (std::size_t i = 0; i < bytes.size(); ++i) px.data()[i] = bytes[i] / static_cast<double>(maxval);
  const auto tick = tick_from_filename(path.filename().string());
  return Frame(std::move(px), tick.value_or(0));
}

}  // namespace aerotrack
