#pragma once

#include "aerotrack/imaging.hpp"
#include "aerotrack/rng.hpp"

#include <Eigen/Core>

#include <array>
#include <string>

namespace aerotrack {

struct ChaserState {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();  // m, world frame, z up
  double yaw = 0.0;                                    // rad in (-pi, pi], counter-clockwise
  Eigen::Vector3d velocity = Eigen::Vector3d::Zero();  // realized, world frame

  Pose pose() const { return {position, yaw}; }
};

struct TargetState {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Vector3d velocity = Eigen::Vector3d::Zero();
};

struct WorldState {
  ChaserState chaser;
  TargetState target;
  std::uint64_t tick = 0;
  double dt = 0.1;

  double time() const { return static_cast<double>(tick) * dt; }
  double distance() const { return (target.position - chaser.position).norm(); }
};

enum class ManeuverPlane { XY, YZ };

/// Target velocity program: (forward_speed, A sin(2 pi f t), 0) in XY, (forward_speed, 0, A sin) in YZ.
struct ManeuverSpec {
  ManeuverPlane plane = ManeuverPlane::XY;
  double amplitude = 5.0;   // m/s
  double frequency = 0.1;   // Hz
  double forward_speed = 0.5;
};

struct ManeuverDistribution {
  double amplitude_mean = 5.0;
  double amplitude_sigma = 1.0;
  double frequency_mean = 0.1;
  double frequency_sigma = 0.05;
  double forward_speed = 0.5;

  void validate() const;
};

/// One row of the discrete action table: unit body-frame velocity intents (x forward, y right,
/// z down) and a yaw rate in deg/s where positive turns left.
struct ActionCommand {
  int v_x = 0;
  int v_y = 0;
  int v_z = 0;
  double yaw_rate = 0.0;
  double scale = 1.0;  // m/s per unit intent

  friend bool operator==(const ActionCommand&, const ActionCommand&) = default;
};

/// Continuous command consumed by the dynamics: body-frame velocity (forward, right, down) in m/s
/// and yaw rate in deg/s, positive = turn left (yaw increases).
struct VelocityCommand {
  Eigen::Vector3d body_velocity = Eigen::Vector3d::Zero();
  double yaw_rate = 0.0;
};

VelocityCommand to_velocity(const ActionCommand& action);

struct DynamicsConfig {
  double dt = 0.1;           // s per control step
  double tau = 0.3;          // velocity lag time constant, s; <= 0 means instantaneous
  double wind_sigma = 0.1;   // m/s per axis per step
  double action_scale = 2.0; // m/s

  void validate() const;
};

struct SpawnConfig {
  double altitude = 50.0;
  double desired_distance = 8.0;
};

double wrap_angle(double radians);

/// Chaser at (0, 0, altitude) facing +x, target on the optical axis at the desired distance,
/// maneuver drawn from `dist` (plane, then amplitude, then frequency).
std::pair<WorldState, ManeuverSpec> reset(const ManeuverDistribution& dist, const SpawnConfig& spawn,
                                          double dt, Rng& rng);

ManeuverSpec sample_maneuver(const ManeuverDistribution& dist, Rng& rng);

Eigen::Vector3d target_velocity(const ManeuverSpec& spec, double t);

WorldState step_world(const WorldState& state, const VelocityCommand& command, const ManeuverSpec& spec,
                      const DynamicsConfig& dynamics, Rng& rng);

std::string to_string(ManeuverPlane plane);

}  // namespace aerotrack
