#include "aerotrack/render.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace aerotrack {
namespace {

double lattice(std::int64_t x, std::int64_t y, std::uint64_t seed) {
  std::uint64_t h = seed * 0x9E3779B97F4A7C15ULL;
  h ^= static_cast<std::uint64_t>(x) * 0xBF58476D1CE4E5B9ULL;
  h ^= static_cast<std::uint64_t>(y) * 0x94D049BB133111EBULL;
  h ^= h >> 31;
  h *= 0xD6E8FEB86659FD93ULL;
  h ^= h >> 32;
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

double smooth(double t) { return t * t * (3.0 - 2.0 * t); }

double value_noise(double x, double y, std::uint64_t seed) {
  const double fx = std::floor(x);
  const double fy = std::floor(y);
  const auto ix = static_cast<std::int64_t>(fx);
  const auto iy = static_cast<std::int64_t>(fy);
  const double tx = smooth(x - fx);
  const double ty = smooth(y - fy);
  const double a = lattice(ix, iy, seed);
  const double b = lattice(ix + 1, iy, seed);
  const double c = lattice(ix, iy + 1, seed);
  const double d = lattice(ix + 1, iy + 1, seed);
  return (a + (b - a) * tx) + ((c + (d - c) * tx) - (a + (b - a) * tx)) * ty;
}

// Fractal sum in [0, 1].
double fbm(double x, double y, std::uint64_t seed, int octaves) {
  double sum = 0.0, norm = 0.0, amp = 1.0;
  for (int o = 0; o < octaves; ++o) {
    sum += amp * value_noise(x, y, seed + static_cast<std::uint64_t>(o) * 1013);
    norm += amp;
    amp *= 0.5;
    x *= 2.0;
    y *= 2.0;
  }
  return sum / norm;
}

constexpr double kSky = 0.82;

}  // namespace

double background_intensity(const SceneConfig& scene, const Eigen::Vector3d& origin,
                            const Eigen::Vector3d& direction) {
  if (scene.plain) return kSky;
  const double horizontal = std::hypot(direction.x(), direction.y());
  const double elevation = std::atan2(direction.z(), horizontal);

  // backdrop cylinder (ray starts inside it)
  const double a = direction.x() * direction.x() + direction.y() * direction.y();
  const double b = 2.0 * (origin.x() * direction.x() + origin.y() * direction.y());
  const double c = origin.x() * origin.x() + origin.y() * origin.y() -
                   scene.backdrop_radius * scene.backdrop_radius;
  double t_wall = std::numeric_limits<double>::infinity();
  if (a > 0.0 && c < 0.0) t_wall = (-b + std::sqrt(b * b - 4.0 * a * c)) / (2.0 * a);

  if (direction.z() < 0.0 && origin.z() > 0.0) {
    const double t_ground = -origin.z() / direction.z();
    if (t_ground < t_wall) {
      const Eigen::Vector3d hit = origin + t_ground * direction;
      const double range = t_ground * direction.norm();
      const double fade = std::exp(-range / 250.0);
      const double tex = fbm(hit.x() / 6.0, hit.y() / 6.0, scene.seed + 11, 3) - 0.5;
      return 0.5 + 0.35 * fade * tex;
    }
  }

  if (std::isfinite(t_wall)) {
    const Eigen::Vector3d hit = origin + t_wall * direction;
    const double azimuth = std::atan2(hit.y(), hit.x());
    const double arc = azimuth * scene.backdrop_radius;
    const double ridge = scene.ridge_base + scene.ridge_amplitude * fbm(arc / 70.0, 0.5, scene.seed + 23, 3);
    if (hit.z() < ridge) {
      const double tex = fbm(arc / 9.0, hit.z() / 9.0, scene.seed + 37, 3) - 0.5;
      return 0.52 + 0.3 * tex;
    }
  }

  const double clouds = fbm(std::atan2(direction.y(), direction.x()) * 12.0, elevation * 12.0, scene.seed + 51, 3) - 0.5;
  return std::clamp(kSky + 0.15 * elevation + 0.12 * clouds, 0.0, 1.0);
}

std::optional<BoundingBox> ground_truth_box(const WorldState& state, const CameraModel& camera,
                                            const SceneConfig& scene) {
  const Pose pose = state.chaser.pose();
  const auto center = project(camera, pose, state.target.position);
  if (!center) return std::nullopt;
  const double depth = world_to_body(pose, state.target.position).x();
  const double width = camera.focal_px * scene.target_size / depth;
  return BoundingBox::centered(*center, width, width * scene.target_aspect);
}

RenderResult render(const WorldState& state, const CameraModel& camera, const SceneConfig& scene, Rng& rng) {
  camera.validate();
  const Pose pose = state.chaser.pose();
  Image px(camera.height, camera.width);
  for (int r = 0; r < camera.height; ++r) {
    for (int c = 0; c < camera.width; ++c) {
      const Eigen::Vector3d ray(1.0, (c - camera.cx()) / camera.focal_px, (r - camera.cy()) / camera.focal_px);
      px(r, c) = background_intensity(scene, pose.position, body_to_world_direction(pose.yaw, ray));
    }
  }

  // Target sprite, drawn whenever any part of it can land in the image.
  if (auto center = project_unbounded(camera, pose, state.target.position)) {
    const double depth = world_to_body(pose, state.target.position).x();
    const double rx = 0.5 * camera.focal_px * scene.target_size / depth;
    const double ry = rx * scene.target_aspect;
    const int c0 = std::max(0, static_cast<int>(std::floor(center->u - rx - 1)));
    const int c1 = std::min(camera.width - 1, static_cast<int>(std::ceil(center->u + rx + 1)));
    const int r0 = std::max(0, static_cast<int>(std::floor(center->v - ry - 1)));
    const int r1 = std::min(camera.height - 1, static_cast<int>(std::ceil(center->v + ry + 1)));
    const double soft = std::max(std::min(rx, ry), 0.5);
    for (int r = r0; r <= r1; ++r) {
      for (int c = c0; c <= c1; ++c) {
        const double dx = (c - center->u) / rx;
        const double dy = (r - center->v) / ry;
        const double q = std::sqrt(dx * dx + dy * dy);
        const double coverage = std::clamp((1.0 - q) * soft + 0.5, 0.0, 1.0);
        if (coverage <= 0.0) continue;
        const double shade = 0.08 + 0.14 * std::min(1.0, q * q) + 0.05 * (dy > 0 ? dy : 0.0);
        px(r, c) = (1.0 - coverage) * px(r, c) + coverage * shade;
      }
    }
  }

  if (scene.sensor_noise > 0.0)
    for (Eigen::Index i = 0; i < px.size(); ++i)
      px.data()[i] = std::clamp(normal(rng, px.data()[i], scene.sensor_noise), 0.0, 1.0);
  else
    px = px.max(0.0).min(1.0);

  return {Frame(std::move(px), state.tick), ground_truth_box(state, camera, scene)};
}

}  // namespace aerotrack
