#include "aerotrack/env.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

namespace aerotrack {

std::array<double, kTupleSize> ObservationTuple::flatten() const {
  return {box.x_min, box.y_min, box.x_max, box.y_max, distance, velocity.x(), velocity.y(), velocity.z(), yaw};
}

ObservationTuple ObservationTuple::unflatten(std::span<const double, kTupleSize> v) {
  ObservationTuple t;
  t.box = {v[0], v[1], v[2], v[3]};
  t.distance = v[4];
  t.velocity = {v[5], v[6], v[7]};
  t.yaw = v[8];
  return t;
}

void ObservationStack::push(const ObservationTuple& tuple) {
  std::shift_left(tuples_.begin(), tuples_.end(), 1);
  tuples_.back() = tuple;
}

std::array<double, kObservationSize> ObservationStack::flatten() const {
  std::array<double, kObservationSize> out{};
  for (int i = 0; i < kStackDepth; ++i) {
    const auto t = tuples_[i].flatten();
    std::copy(t.begin(), t.end(), out.begin() + i * kTupleSize);
  }
  return out;
}

ObservationStack ObservationStack::unflatten(std::span<const double, kObservationSize> values) {
  ObservationStack s;
  for (int i = 0; i < kStackDepth; ++i)
    s.tuples_[i] = ObservationTuple::unflatten(values.subspan(i * kTupleSize).first<kTupleSize>());
  return s;
}

std::array<float, kObservationSize> encode_observation(const ObservationStack& stack, const CameraModel& camera,
                                                       double action_scale) {
  std::array<float, kObservationSize> out{};
  const auto flat = stack.flatten();
  for (int i = 0; i < kStackDepth; ++i) {
    const double* t = flat.data() + i * kTupleSize;
    float* o = out.data() + i * kTupleSize;
    o[0] = static_cast<float>(t[0] / camera.width);
    o[1] = static_cast<float>(t[1] / camera.height);
    o[2] = static_cast<float>(t[2] / camera.width);
    o[3] = static_cast<float>(t[3] / camera.height);
    o[4] = static_cast<float>(t[4] / 50.0);
    for (int k = 5; k < 8; ++k) o[k] = static_cast<float>(t[k] / action_scale);
    o[8] = static_cast<float>(t[8] / std::numbers::pi);
  }
  return out;
}

void EpisodeConfig::validate() const {
  if (max_steps <= 0) throw Error("max_steps must be positive");
  if (max_no_detection <= 0) throw Error("max_no_detection must be positive");
  if (!(desired_distance > 0.0)) throw Error("desired_distance must be positive");
  if (!(alpha1 > 0.0) || !(alpha2 > 0.0)) throw Error("reward shape parameters must be positive");
}

std::string to_string(Termination reason) {
  switch (reason) {
    case Termination::None: return "none";
    case Termination::NoDetection: return "no_detection";
    case Termination::MaxSteps: return "max_steps";
  }
  return "unknown";
}

ActionCommand decode_action(int index, double scale) {
  static constexpr int table[kNumActions][4] = {
      {1, 0, 0, 0},    {-1, 0, 0, 0},  {0, 0, 0, 30},  {0, 0, 0, -30}, {1, 0, 0, 30},
      {1, 0, 0, -30},  {-1, 0, 0, 30}, {-1, 0, 0, -30}, {0, 1, -1, 0}, {0, -1, -1, 0},
      {0, 1, 1, 0},    {0, -1, 1, 0},  {0, 0, 0, 0},
  };
  if (index < 0 || index >= kNumActions) throw Error("action index out of range: " + std::to_string(index));
  const auto& row = table[index];
  return {row[0], row[1], row[2], static_cast<double>(row[3]), scale};
}

double reward_alignment(const std::optional<PixelPoint>& target_center, const CameraModel& camera, double alpha1) {
  if (!target_center) return 0.0;
  return std::exp(-alpha1 * distance(*target_center, camera.principal_point()) / camera.diagonal());
}

double reward_distance(double d, double d_star, double alpha2) { return std::exp(-alpha2 * std::abs(d - d_star)); }

double reward_continuity(int n, int n_max) {
  if (n_max <= 0) throw Error("n_max must be positive");
  const double x = static_cast<double>(std::clamp(n, 0, n_max)) / n_max;
  return 1.0 / std::exp(1.0 - 2.0 * x);
}

void EnvConfig::validate() const {
  camera.validate();
  detector.validate();
  fusion.validate();
  kcf.validate();
  maneuvers.validate();
  dynamics.validate();
  episode.validate();
}

TrackingEnv::TrackingEnv(EnvConfig config) : config_(std::move(config)) { config_.validate(); }

StepResult TrackingEnv::reset(std::uint64_t episode_seed) {
  episode_seed_ = episode_seed;
  Rng maneuver_rng = make_stream(episode_seed, "maneuver");
  world_rng_ = make_stream(episode_seed, "world");
  detector_rng_ = make_stream(episode_seed, "detector");
  render_rng_ = make_stream(episode_seed, "render");
  std::tie(world_, maneuver_) = aerotrack::reset(config_.maneuvers, config_.spawn, config_.dynamics.dt, maneuver_rng);

  stack_ = ObservationStack{};
  steps_ = 0;
  consecutive_detections_ = 0;
  consecutive_misses_ = 0;
  finished_ = false;
  last_frame_.reset();
  estimator_.reset();
  oracle_.reset();
  if (config_.perception == Perception::Fused) {
    estimator_.emplace(config_.fusion, config_.kcf);
    oracle_ = std::make_unique<OracleDetector>(
        [this](std::uint64_t tick) -> std::optional<BoundingBox> {
          return tick == world_.tick ? current_truth_ : std::nullopt;
        },
        config_.detector, episode_seed);
  }
  return observe(-1, false);
}

StepResult TrackingEnv::step(int action_index) {
  const ActionCommand action = decode_action(action_index, config_.dynamics.action_scale);
  return step(to_velocity(action), action_index);
}

StepResult TrackingEnv::step(const VelocityCommand& command, int action_label) {
  if (finished_) throw Error("episode finished");
  world_ = step_world(world_, command, maneuver_, config_.dynamics, world_rng_);
  ++steps_;
  return observe(action_label, true);
}

std::pair<bool, BoundingBox> TrackingEnv::perceive() {
  const bool need_pixels = config_.perception == Perception::Fused || config_.render_frames;
  if (need_pixels) {
    RenderResult rendered = render(world_, config_.camera, config_.scene, render_rng_);
    current_truth_ = rendered.truth;
    last_frame_ = std::move(rendered.frame);
  } else {
    current_truth_ = ground_truth_box(world_, config_.camera, config_.scene);
  }

  if (config_.perception == Perception::Fused) {
    const TargetEstimate est = estimator_->process(*last_frame_, *oracle_);
    return {est.valid, est.valid ? est.box : BoundingBox::sentinel()};
  }
  const Detection det = config_.render_frames
                            ? detect(*last_frame_, current_truth_, config_.detector, detector_rng_)
                            : detect(config_.camera.width, config_.camera.height, current_truth_,
                                     config_.detector, detector_rng_);
  const bool valid = is_valid(det, config_.fusion.confidence);
  return {valid, valid ? det.box : BoundingBox::sentinel()};
}

StepResult TrackingEnv::observe(int action_label, bool after_step) {
  const auto [valid, box] = perceive();

  ObservationTuple tuple;
  tuple.box = box;
  tuple.distance = world_.distance();
  tuple.velocity = world_to_body(Pose{Eigen::Vector3d::Zero(), world_.chaser.yaw}, world_.chaser.velocity);
  tuple.yaw = world_.chaser.yaw;
  stack_.push(tuple);

  if (valid) {
    ++consecutive_detections_;
    consecutive_misses_ = 0;
  } else {
    consecutive_detections_ = 0;
    ++consecutive_misses_;
  }

  const EpisodeConfig& ep = config_.episode;
  StepResult result;
  result.observation = stack_;
  result.detection_valid = valid;
  if (valid) result.target_center = bbox_center(box);
  result.reward.alignment = reward_alignment(result.target_center, config_.camera, ep.alpha1);
  result.reward.distance = reward_distance(tuple.distance, ep.desired_distance, ep.alpha2);
  result.reward.continuity = reward_continuity(consecutive_detections_, ep.max_steps);
  result.reward.total = result.reward.alignment + result.reward.distance + result.reward.continuity;

  if (after_step) {
    if (consecutive_misses_ >= ep.max_no_detection)
      result.reason = Termination::NoDetection;
    else if (steps_ >= ep.max_steps)
      result.reason = Termination::MaxSteps;
    result.terminated = result.reason != Termination::None;
    finished_ = result.terminated;
  }

  if (log_) {
    nlohmann::json rec;
    rec["tick"] = world_.tick;
    rec["step"] = steps_;
    rec["action"] = action_label;
    const auto flat = tuple.flatten();
    rec["observation"] = std::vector<double>(flat.begin(), flat.end());
    rec["detection_valid"] = valid;
    rec["reward"] = {{"alignment", result.reward.alignment},
                     {"distance", result.reward.distance},
                     {"continuity", result.reward.continuity},
                     {"total", result.reward.total}};
    const auto& c = world_.chaser.position;
    const auto& t = world_.target.position;
    rec["chaser"] = {c.x(), c.y(), c.z()};
    rec["chaser_yaw"] = world_.chaser.yaw;
    rec["target"] = {t.x(), t.y(), t.z()};
    rec["terminated"] = result.terminated;
    rec["reason"] = to_string(result.reason);
    *log_ << rec.dump() << '\n';
  }
  return result;
}

}  // namespace aerotrack
