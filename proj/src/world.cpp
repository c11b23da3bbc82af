#include "aerotrack/world.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace aerotrack {

void ManeuverDistribution::validate() const {
  if (!(amplitude_sigma >= 0.0) || !(frequency_sigma >= 0.0))
    throw Error("maneuver sigmas must be non-negative");
}

void DynamicsConfig::validate() const {
  if (!(dt > 0.0)) throw Error("dt must be positive");
  if (!(wind_sigma >= 0.0)) throw Error("wind_sigma must be non-negative");
  if (!(action_scale > 0.0)) throw Error("action_scale must be positive");
}

VelocityCommand to_velocity(const ActionCommand& action) {
  VelocityCommand cmd;
  cmd.body_velocity = Eigen::Vector3d(action.v_x, action.v_y, action.v_z) * action.scale;
  cmd.yaw_rate = action.yaw_rate;
  return cmd;
}

double wrap_angle(double radians) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double a = std::fmod(radians, two_pi);
  if (a <= -std::numbers::pi) a += two_pi;
  if (a > std::numbers::pi) a -= two_pi;
  return a;
}

ManeuverSpec sample_maneuver(const ManeuverDistribution& dist, Rng& rng) {
  dist.validate();
  ManeuverSpec spec;
  spec.plane = bernoulli(rng, 0.5) ? ManeuverPlane::YZ : ManeuverPlane::XY;
  spec.amplitude = std::max(0.0, normal(rng, dist.amplitude_mean, dist.amplitude_sigma));
  spec.frequency = std::max(0.0, normal(rng, dist.frequency_mean, dist.frequency_sigma));
  spec.forward_speed = dist.forward_speed;
  return spec;
}

std::pair<WorldState, ManeuverSpec> reset(const ManeuverDistribution& dist, const SpawnConfig& spawn,
                                          double dt, Rng& rng) {
  WorldState state;
  state.dt = dt;
  state.chaser.position = {0.0, 0.0, spawn.altitude};
  state.chaser.yaw = 0.0;
  state.target.position = {spawn.desired_distance, 0.0, spawn.altitude};
  const ManeuverSpec spec = sample_maneuver(dist, rng);
  state.target.velocity = target_velocity(spec, 0.0);
  return {state, spec};
}

Eigen::Vector3d target_velocity(const ManeuverSpec& spec, double t) {
  const double lateral = spec.amplitude * std::sin(2.0 * std::numbers::pi * spec.frequency * t);
  if (spec.plane == ManeuverPlane::XY) return {spec.forward_speed, lateral, 0.0};
  return {spec.forward_speed, 0.0, lateral};
}

WorldState step_world(const WorldState& state, const VelocityCommand& command, const ManeuverSpec& spec,
                      const DynamicsConfig& dynamics, Rng& rng) {
  WorldState next = state;
  const double dt = state.dt;

  const Eigen::Vector3d commanded = body_to_world_direction(state.chaser.yaw, command.body_velocity);
  const double blend = dynamics.tau > 0.0 ? 1.0 - std::exp(-dt / dynamics.tau) : 1.0;
  Eigen::Vector3d velocity = state.chaser.velocity + blend * (commanded - state.chaser.velocity);
  for (int axis = 0; axis < 3; ++axis) velocity(axis) = normal(rng, velocity(axis), dynamics.wind_sigma);

  next.chaser.velocity = velocity;
  next.chaser.position = state.chaser.position + velocity * dt;
  next.chaser.yaw = wrap_angle(state.chaser.yaw + command.yaw_rate * std::numbers::pi / 180.0 * dt);

  const Eigen::Vector3d target_v = target_velocity(spec, state.time());
  next.target.velocity = target_v;
  next.target.position = state.target.position + target_v * dt;
  next.tick = state.tick + 1;
  return next;
}

std::string to_string(ManeuverPlane plane) { return plane == ManeuverPlane::XY ? "XY" : "YZ"; }

}  // namespace aerotrack
