#pragma once

#include "aerotrack/detector.hpp"
#include "aerotrack/fusion.hpp"
#include "aerotrack/render.hpp"
#include "aerotrack/world.hpp"

#include <array>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>

namespace aerotrack {

inline constexpr int kNumActions = 13;
inline constexpr int kTupleSize = 9;
inline constexpr int kStackDepth = 5;
inline constexpr int kObservationSize = kTupleSize * kStackDepth;  // 45

/// [x_min, y_min, x_max, y_max, d, v_x, v_y, v_z, theta]
struct ObservationTuple {
  BoundingBox box;                                   // zeros when the detection is invalid
  double distance = 0.0;                             // m
  Eigen::Vector3d velocity = Eigen::Vector3d::Zero(); // chaser body frame (forward, right, down), m/s
  double yaw = 0.0;                                  // rad

  std::array<double, kTupleSize> flatten() const;
  static ObservationTuple unflatten(std::span<const double, kTupleSize> values);
  friend bool operator==(const ObservationTuple&, const ObservationTuple&) = default;
};

/// The five most recent tuples, oldest first; slots before the episode start are zero.
class ObservationStack {
 public:
  void push(const ObservationTuple& tuple);
  const std::array<ObservationTuple, kStackDepth>& tuples() const { return tuples_; }
  const ObservationTuple& latest() const { return tuples_.back(); }

  std::array<double, kObservationSize> flatten() const;
  static ObservationStack unflatten(std::span<const double, kObservationSize> values);
  friend bool operator==(const ObservationStack&, const ObservationStack&) = default;

 private:
  std::array<ObservationTuple, kStackDepth> tuples_{};
};

/// Policy input: pixels scaled by the image size, distance by 50 m, velocities by the action
/// scale and yaw by pi.
std::array<float, kObservationSize> encode_observation(const ObservationStack& stack, const CameraModel& camera,
                                                       double action_scale);

struct RewardBreakdown {
  double alignment = 0.0;   // R_a
  double distance = 0.0;    // R_t
  double continuity = 0.0;  // R_c
  double total = 0.0;
};

struct EpisodeConfig {
  int max_steps = 500;
  int max_no_detection = 25;
  double desired_distance = 8.0;
  double alpha1 = 5.0;
  double alpha2 = 0.5;

  void validate() const;
};

enum class Termination { None, NoDetection, MaxSteps };
std::string to_string(Termination reason);

/// Row `index` of the 13-entry discrete action table.
ActionCommand decode_action(int index, double scale = 1.0);

double reward_alignment(const std::optional<PixelPoint>& target_center, const CameraModel& camera, double alpha1);
double reward_distance(double d, double d_star, double alpha2);
double reward_continuity(int n, int n_max);

enum class Perception { OracleDirect, Fused };

struct EnvConfig {
  CameraModel camera;
  DetectorConfig detector;
  FusionThresholds fusion;  // fusion.confidence is also the detector validity threshold
  KcfParams kcf;
  ManeuverDistribution maneuvers;
  DynamicsConfig dynamics;
  SpawnConfig spawn;
  EpisodeConfig episode;
  SceneConfig scene;
  Perception perception = Perception::OracleDirect;
  bool render_frames = false;  // oracle path only needs the true box; fused always renders

  void validate() const;
};

struct StepResult {
  ObservationStack observation;
  RewardBreakdown reward;
  bool terminated = false;
  Termination reason = Termination::None;
  bool detection_valid = false;
  std::optional<PixelPoint> target_center;  // measured center used for R_a
};

/// Single-threaded MDP instance. All randomness derives from the seed passed to reset().
class TrackingEnv {
 public:
  explicit TrackingEnv(EnvConfig config);
  TrackingEnv(const TrackingEnv&) = delete;
  TrackingEnv& operator=(const TrackingEnv&) = delete;

  StepResult reset(std::uint64_t episode_seed);
  StepResult step(int action_index);
  StepResult step(const VelocityCommand& command, int action_label = -1);

  const EnvConfig& config() const { return config_; }
  const WorldState& world() const { return world_; }
  const ManeuverSpec& maneuver() const { return maneuver_; }
  const ObservationStack& observation() const { return stack_; }
  int steps() const { return steps_; }
  int consecutive_detections() const { return consecutive_detections_; }
  int consecutive_misses() const { return consecutive_misses_; }
  bool finished() const { return finished_; }
  const std::optional<Frame>& last_frame() const { return last_frame_; }

  /// When set, every step appends one JSON record to the stream.
  void set_trajectory_log(std::ostream* out) { log_ = out; }

 private:
  StepResult observe(int action_label, bool after_step);
  std::pair<bool, BoundingBox> perceive();

  EnvConfig config_;
  WorldState world_;
  ManeuverSpec maneuver_;
  ObservationStack stack_;
  Rng world_rng_;
  Rng detector_rng_;
  Rng render_rng_;
  std::unique_ptr<OracleDetector> oracle_;
  std::optional<FusionEstimator> estimator_;
  std::optional<BoundingBox> current_truth_;
  std::optional<Frame> last_frame_;
  std::uint64_t episode_seed_ = 0;
  int steps_ = 0;
  int consecutive_detections_ = 0;
  int consecutive_misses_ = 0;
  bool finished_ = true;
  std::ostream* log_ = nullptr;
};

}  // namespace aerotrack
