#pragma once

#include "aerotrack/env.hpp"
#include "aerotrack/fusion.hpp"

#include <optional>
#include <vector>

namespace aerotrack {

enum class AxisMapping {
  Direct,  // v_x <- pixel u error, v_y <- pixel v error, v_z <- distance error
  Physical,      // v_x <- distance error, v_y <- pixel u error, v_z <- pixel v error
};

std::string to_string(AxisMapping mapping);
AxisMapping parse_axis_mapping(const std::string& text);

struct IbvsGains {
  double k_u = 0.01;
  double k_v = 0.01;
  double k_z = 0.5;
  double k_psi = 1.0;
  AxisMapping mapping = AxisMapping::Physical;
  double max_speed = 2.0;      // m/s, per axis
  double max_yaw_rate = 30.0;  // deg/s
  int hold_steps = 5;          // steps the last command is held after losing the target

  void validate() const;
  friend bool operator==(const IbvsGains&, const IbvsGains&) = default;
};

/// Controller output in the body frame (forward, right, down). yaw_rate is in deg/s and positive
/// turns toward the image right, i.e. toward a target with u > c_x.
struct IbvsCommand {
  double v_x = 0.0;
  double v_y = 0.0;
  double v_z = 0.0;
  double yaw_rate = 0.0;

  friend bool operator==(const IbvsCommand&, const IbvsCommand&) = default;
};

/// Proportional law before clamping.
IbvsCommand ibvs_unclamped(PixelPoint target, double d, const CameraModel& camera, const IbvsGains& gains,
                           double d_star);
IbvsCommand clamp_command(const IbvsCommand& cmd, const IbvsGains& gains);

/// Simulator command. The simulator's yaw rate is positive to the left, so the sign flips.
VelocityCommand to_velocity(const IbvsCommand& cmd);

/// Proportional controller with the lost-target fallback register.
class IbvsController {
 public:
  explicit IbvsController(IbvsGains gains = {}, CameraModel camera = {}, double d_star = 8.0);

  IbvsCommand command(const std::optional<PixelPoint>& target_center, double d);
  IbvsCommand command(const TargetEstimate& estimate, double d);
  void reset();
  const IbvsGains& gains() const { return gains_; }

 private:
  IbvsGains gains_;
  CameraModel camera_;
  double d_star_;
  IbvsCommand last_;
  int misses_ = 0;
};

struct GainGrid {
  std::vector<double> k_u{0.005, 0.01, 0.02, 0.05};
  std::vector<double> k_v{0.005, 0.01, 0.02, 0.05};
  std::vector<double> k_z{0.2, 0.5, 1.0};
  std::vector<double> k_psi{0.2, 0.5, 1.0};

  std::vector<IbvsGains> candidates(const IbvsGains& base) const;
};

struct GainScore {
  IbvsGains gains;
  double mean_length = 0.0;
  double mean_distance_error = 0.0;  // mean over episodes of |average distance - d*|
};

struct TuneResult {
  IbvsGains best;
  std::vector<GainScore> scores;
};

/// Evaluates every candidate on the same seeded episodes and keeps the one with the longest mean
/// episode, ties going to the smaller mean distance error.
TuneResult tune_gains(const EnvConfig& env_config, const std::vector<IbvsGains>& candidates, int episodes,
                      std::uint64_t seed);

/// Maneuver distribution used for tuning: amplitude 5 m/s, frequency 0.1 Hz, no spread.
ManeuverDistribution tuning_maneuver();

}  // namespace aerotrack
