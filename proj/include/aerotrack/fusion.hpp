#pragma once

#include "aerotrack/detector.hpp"
#include "aerotrack/kcf.hpp"

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace aerotrack {

enum class TrackMode { Uninitialized, Tracking, Searching };
enum class EstimateSource { Kcf, Detector, None };

std::string to_string(TrackMode mode);
std::string to_string(EstimateSource source);

/// Constant-velocity bookkeeping over the last two target positions.
///
/// velocity == last_pos - prev_pos whenever valid_history >= 2. While the target is lost the
/// velocity is frozen and the position is extrapolated for at most `max_extrapolation` steps,
/// after which the prediction stays pinned at last_pos.
struct PhysicsState {
  PixelPoint last_pos;
  PixelPoint prev_pos;
  PixelPoint velocity;      // px per step
  int valid_history = 0;    // saturates at 2
  int extrapolated = 0;     // consecutive steps without a measured position
};

struct FusionThresholds {
  double physics_px = 40.0;   // P_T: max distance between KCF output and physics prediction
  double apce = 15.0;         // A_T: min APCE for accepting a KCF response
  double confidence = 0.75;   // conf_T: detector acceptance threshold
  int max_extrapolation = 3;
  double min_train_box = 8.0;  // detector boxes are grown to at least this size before training

  void validate() const;
};

struct EstimatorState {
  TrackMode mode = TrackMode::Uninitialized;
  std::optional<KcfModel> kcf;  // engaged iff mode == Tracking
  PhysicsState physics;
  FusionThresholds thresholds;
  KcfParams kcf_params;
};

struct TargetEstimate {
  std::uint64_t tick = 0;
  BoundingBox box;                    // sentinel when invalid
  std::optional<PixelPoint> center;
  EstimateSource source = EstimateSource::None;
  std::optional<double> apce_value;   // APCE of the KCF response, when KCF ran this step
  bool valid = false;
  bool detector_invoked = false;
};

PixelPoint predict_physics(const PhysicsState& physics, int max_extrapolation = 3);
PhysicsState physics_update(const PhysicsState& physics, PixelPoint measured);
PhysicsState physics_update_lost(const PhysicsState& physics, int max_extrapolation = 3);

std::pair<EstimatorState, TargetEstimate> initialize(const Frame& frame, Detector& detector,
                                                     EstimatorState state);
std::pair<EstimatorState, TargetEstimate> step(const Frame& frame, Detector& detector,
                                               EstimatorState state);

/// Fraction of steps on which the detector ran (successful or not).
double detector_call_fraction(std::span<const TargetEstimate> log);

/// Owning wrapper for one tracking session.
class FusionEstimator {
 public:
  explicit FusionEstimator(FusionThresholds thresholds = {}, KcfParams kcf = {});

  TargetEstimate process(const Frame& frame, Detector& detector);
  const EstimatorState& state() const { return state_; }

 private:
  EstimatorState state_;
};

/// Plain-text estimate log: header row then one comma-separated record per step.
void write_estimate_log(std::ostream& out, std::span<const TargetEstimate> log);

/// 5th percentile of APCE while tracking a clean sequence with KCF, initialized from the first
/// ground-truth box and re-centered on every frame. Frames without truth are skipped.
double calibrate_apce(std::span<const Frame> frames,
                      std::span<const std::optional<BoundingBox>> truth, const KcfParams& params,
                      double percentile = 5.0);

}  // namespace aerotrack
