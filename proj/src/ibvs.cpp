#include "aerotrack/ibvs.hpp"

#include "aerotrack/episodes.hpp"

#include <algorithm>
#include <cmath>

namespace aerotrack {

std::string to_string(AxisMapping mapping) {
  return mapping == AxisMapping::Physical ? "physical" : "direct";
}

AxisMapping parse_axis_mapping(const std::string& text) {
  if (text == "physical") return AxisMapping::Physical;
  if (text == "direct") return AxisMapping::Direct;
  throw Error("unknown axis mapping: " + text);
}

void IbvsGains::validate() const {
  for (double k : {k_u, k_v, k_z, k_psi})
    if (!std::isfinite(k)) throw Error("IBVS gains must be finite");
  if (!(max_speed > 0.0) || !(max_yaw_rate > 0.0)) throw Error("IBVS clamps must be positive");
  if (hold_steps < 0) throw Error("hold_steps must be non-negative");
}

IbvsCommand ibvs_unclamped(PixelPoint target, double d, const CameraModel& camera, const IbvsGains& gains,
                           double d_star) {
  const double e_x = target.u - camera.cx();
  const double e_y = target.v - camera.cy();
  const double e_z = d - d_star;
  const double e_psi = d > 0.0 ? e_x / d : 0.0;
  IbvsCommand cmd;
  if (gains.mapping == AxisMapping::Direct) {
    cmd.v_x = gains.k_u * e_x;
    cmd.v_y = gains.k_v * e_y;
    cmd.v_z = gains.k_z * e_z;
  } else {
    cmd.v_x = gains.k_z * e_z;
    cmd.v_y = gains.k_u * e_x;
    cmd.v_z = gains.k_v * e_y;
  }
  cmd.yaw_rate = gains.k_psi * e_psi;
  return cmd;
}

IbvsCommand clamp_command(const IbvsCommand& cmd, const IbvsGains& gains) {
  auto lim = [](double x, double m) { return std::clamp(x, -m, m); };
  return {lim(cmd.v_x, gains.max_speed), lim(cmd.v_y, gains.max_speed), lim(cmd.v_z, gains.max_speed),
          lim(cmd.yaw_rate, gains.max_yaw_rate)};
}

VelocityCommand to_velocity(const IbvsCommand& cmd) {
  VelocityCommand out;
  out.body_velocity = {cmd.v_x, cmd.v_y, cmd.v_z};
  out.yaw_rate = -cmd.yaw_rate;
  return out;
}

IbvsController::IbvsController(IbvsGains gains, CameraModel camera, double d_star)
    : gains_(gains), camera_(camera), d_star_(d_star) {
  gains_.validate();
}

IbvsCommand IbvsController::command(const std::optional<PixelPoint>& target_center, double d) {
  if (!target_center) {
    ++misses_;
    if (misses_ > gains_.hold_steps) last_ = {};
    return last_;
  }
  misses_ = 0;
  last_ = clamp_command(ibvs_unclamped(*target_center, d, camera_, gains_, d_star_), gains_);
  return last_;
}

IbvsCommand IbvsController::command(const TargetEstimate& estimate, double d) {
  return command(estimate.valid ? estimate.center : std::nullopt, d);
}

void IbvsController::reset() {
  last_ = {};
  misses_ = 0;
}

std::vector<IbvsGains> GainGrid::candidates(const IbvsGains& base) const {
  std::vector<IbvsGains> out;
  for (double ku : k_u)
    for (double kv : k_v)
      for (double kz : k_z)
        for (double kp : k_psi) {
          IbvsGains g = base;
          g.k_u = ku;
          g.k_v = kv;
          g.k_z = kz;
          g.k_psi = kp;
          out.push_back(g);
        }
  return out;
}

ManeuverDistribution tuning_maneuver() {
  ManeuverDistribution dist;
  dist.amplitude_mean = 5.0;
  dist.amplitude_sigma = 0.0;
  dist.frequency_mean = 0.1;
  dist.frequency_sigma = 0.0;
  return dist;
}

TuneResult tune_gains(const EnvConfig& env_config, const std::vector<IbvsGains>& candidates, int episodes,
                      std::uint64_t seed) {
  if (candidates.empty()) throw Error("gain grid is empty");
  if (episodes <= 0) throw Error("episodes must be positive");
  EnvConfig cfg = env_config;
  cfg.maneuvers = tuning_maneuver();
  const double d_star = cfg.episode.desired_distance;

  TuneResult result;
  for (const IbvsGains& gains : candidates) {
    PidController controller(gains, cfg);
    const auto records = evaluate(cfg, controller, episodes, seed);
    GainScore score{gains, 0.0, 0.0};
    for (const auto& r : records) {
      score.mean_length += r.length;
      score.mean_distance_error += std::abs(r.average_distance - d_star);
    }
    score.mean_length /= episodes;
    score.mean_distance_error /= episodes;
    result.scores.push_back(score);
  }
  const auto best = std::min_element(result.scores.begin(), result.scores.end(), [](const auto& a, const auto& b) {
    if (a.mean_length != b.mean_length) return a.mean_length > b.mean_length;
    return a.mean_distance_error < b.mean_distance_error;
  });
  result.best = best->gains;
  return result;
}

}  // namespace aerotrack
