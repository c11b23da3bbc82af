#pragma once

#include "aerotrack/imaging.hpp"
#include "aerotrack/rng.hpp"
#include "aerotrack/world.hpp"

#include <optional>

namespace aerotrack {

/// Procedural scene: textured ground plane, a ridge/tree-line backdrop on a world-anchored
/// cylinder, and sky above it. The target is a dark shaded ellipse.
struct SceneConfig {
  std::uint64_t seed = 7;
  bool plain = false;             // uniform sky instead of the textured world
  double target_size = 0.4;       // physical span, m
  double target_aspect = 0.6;     // sprite height / width
  double backdrop_radius = 400.0; // m, around the world origin
  double ridge_base = 35.0;       // m
  double ridge_amplitude = 35.0;  // m
  double sensor_noise = 0.01;     // intensity sigma
};

struct RenderResult {
  Frame frame;
  std::optional<BoundingBox> truth;  // absent when the target center is not in view
};

/// True target box, or absent when the target is behind the camera or its center is off-image.
std::optional<BoundingBox> ground_truth_box(const WorldState& state, const CameraModel& camera,
                                            const SceneConfig& scene);

RenderResult render(const WorldState& state, const CameraModel& camera, const SceneConfig& scene, Rng& rng);

/// Background intensity seen along a world-frame ray leaving `origin`.
double background_intensity(const SceneConfig& scene, const Eigen::Vector3d& origin,
                            const Eigen::Vector3d& direction);

}  // namespace aerotrack
