#include "aerotrack/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace aerotrack {

std::string to_string(TrackMode mode) {
  switch (mode) {
    case TrackMode::Uninitialized: return "uninitialized";
    case TrackMode::Tracking: return "tracking";
    case TrackMode::Searching: return "searching";
  }
  return "?";
}

std::string to_string(EstimateSource source) {
  switch (source) {
    case EstimateSource::Kcf: return "kcf";
    case EstimateSource::Detector: return "detector";
    case EstimateSource::None: return "none";
  }
  return "?";
}

void FusionThresholds::validate() const {
  if (!(physics_px > 0.0)) throw Error("physics threshold must be positive");
  if (!(apce >= 0.0)) throw Error("apce threshold must be non-negative");
  if (!(confidence >= 0.0 && confidence <= 1.0)) throw Error("confidence threshold must lie in [0, 1]");
  if (max_extrapolation < 0) throw Error("max_extrapolation must be non-negative");
  if (!(min_train_box >= 4.0)) throw Error("min_train_box must be at least 4 px");
}

PixelPoint predict_physics(const PhysicsState& physics, int max_extrapolation) {
  if (physics.valid_history == 0) throw Error("no history");
  if (physics.valid_history == 1 || physics.extrapolated >= max_extrapolation) return physics.last_pos;
  return physics.last_pos + physics.velocity;
}

PhysicsState physics_update(const PhysicsState& physics, PixelPoint measured) {
  PhysicsState next = physics;
  next.extrapolated = 0;
  if (physics.valid_history == 0) {
    next.last_pos = next.prev_pos = measured;
    next.velocity = {};
    next.valid_history = 1;
    return next;
  }
  next.prev_pos = physics.last_pos;
  next.last_pos = measured;
  next.velocity = measured - physics.last_pos;
  next.valid_history = 2;
  return next;
}

PhysicsState physics_update_lost(const PhysicsState& physics, int max_extrapolation) {
  if (physics.valid_history == 0) return physics;
  PhysicsState next = physics;
  if (physics.valid_history >= 2 && physics.extrapolated < max_extrapolation) {
    // velocity stays frozen; shifting keeps last_pos - prev_pos == velocity
    next.prev_pos = physics.last_pos;
    next.last_pos = physics.last_pos + physics.velocity;
  }
  next.extrapolated = physics.extrapolated + 1;
  return next;
}

namespace {

TargetEstimate invalid_estimate(std::uint64_t tick) {
  TargetEstimate e;
  e.tick = tick;
  return e;
}

BoundingBox trainable_box(const BoundingBox& box, double min_side) {
  const PixelPoint c = bbox_center(box);
  return BoundingBox::centered(c, std::max(box.width(), min_side), std::max(box.height(), min_side));
}

// Detector branch of the flowchart: re-detect, retrain on success, otherwise extrapolate.
std::pair<EstimatorState, TargetEstimate> redetect(const Frame& frame, Detector& detector,
                                                   EstimatorState state, TargetEstimate estimate) {
  estimate.detector_invoked = true;
  const Detection det = detector.detect(frame);
  if (is_valid(det, state.thresholds.confidence)) {
    const PixelPoint c = bbox_center(det.box);
    state.kcf = train_kcf(frame, trainable_box(det.box, state.thresholds.min_train_box), state.kcf_params);
    state.physics = physics_update(state.physics, c);
    state.mode = TrackMode::Tracking;
    estimate.box = det.box;
    estimate.center = c;
    estimate.source = EstimateSource::Detector;
    estimate.valid = true;
    return {std::move(state), estimate};
  }
  if (state.mode != TrackMode::Uninitialized) {
    state.mode = TrackMode::Searching;
    state.kcf.reset();
    state.physics = physics_update_lost(state.physics, state.thresholds.max_extrapolation);
  }
  estimate.box = BoundingBox::sentinel();
  estimate.center.reset();
  estimate.source = EstimateSource::None;
  estimate.valid = false;
  return {std::move(state), estimate};
}

}  // namespace

std::pair<EstimatorState, TargetEstimate> initialize(const Frame& frame, Detector& detector,
                                                     EstimatorState state) {
  if (state.mode != TrackMode::Uninitialized) throw Error("estimator already initialized");
  state.thresholds.validate();
  state.physics = {};
  return redetect(frame, detector, std::move(state), invalid_estimate(frame.tick()));
}

std::pair<EstimatorState, TargetEstimate> step(const Frame& frame, Detector& detector,
                                               EstimatorState state) {
  if (state.mode == TrackMode::Uninitialized) return initialize(frame, detector, std::move(state));

  TargetEstimate estimate = invalid_estimate(frame.tick());
  if (state.mode == TrackMode::Tracking) {
    const KcfModel& model = *state.kcf;
    const KcfDetection kcf = detect_kcf(model, frame);
    const double confidence = apce(kcf.response);
    estimate.apce_value = confidence;

    const PixelPoint predicted = predict_physics(state.physics, state.thresholds.max_extrapolation);
    const bool inside = kcf.position.u >= 0 && kcf.position.u < frame.width() &&
                        kcf.position.v >= 0 && kcf.position.v < frame.height();
    const bool physics_ok = distance(kcf.position, predicted) < state.thresholds.physics_px;
    if (inside && physics_ok && confidence > state.thresholds.apce) {
      state.kcf = update_model(model, frame, kcf.position);
      state.physics = physics_update(state.physics, kcf.position);
      estimate.center = kcf.position;
      estimate.box = BoundingBox::centered(kcf.position, model.box_w, model.box_h);
      estimate.source = EstimateSource::Kcf;
      estimate.valid = true;
      return {std::move(state), estimate};
    }
  }
  return redetect(frame, detector, std::move(state), estimate);
}

double detector_call_fraction(std::span<const TargetEstimate> log) {
  if (log.empty()) throw Error("empty estimate log");
  const auto calls = std::count_if(log.begin(), log.end(), [](const TargetEstimate& e) {
    return e.detector_invoked || e.source == EstimateSource::Detector;
  });
  return static_cast<double>(calls) / static_cast<double>(log.size());
}

FusionEstimator::FusionEstimator(FusionThresholds thresholds, KcfParams kcf) {
  thresholds.validate();
  kcf.validate();
  state_.thresholds = thresholds;
  state_.kcf_params = kcf;
}

TargetEstimate FusionEstimator::process(const Frame& frame, Detector& detector) {
  auto [next, estimate] = step(frame, detector, std::move(state_));
  state_ = std::move(next);
  return estimate;
}

void write_estimate_log(std::ostream& out, std::span<const TargetEstimate> log) {
  out << "tick,source,x_min,y_min,x_max,y_max,apce,valid,detector_invoked\n";
  for (const auto& e : log) {
    out << e.tick << ',' << to_string(e.source) << ',' << e.box.x_min << ',' << e.box.y_min << ','
        << e.box.x_max << ',' << e.box.y_max << ',';
    if (e.apce_value) out << *e.apce_value;
    out << ',' << (e.valid ? 1 : 0) << ',' << (e.detector_invoked ? 1 : 0) << '\n';
  }
}

double calibrate_apce(std::span<const Frame> frames,
                      std::span<const std::optional<BoundingBox>> truth, const KcfParams& params,
                      double percentile) {
  if (frames.size() != truth.size()) throw Error("frames and ground truth differ in length");
  std::optional<KcfModel> model;
  std::vector<double> values;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    if (!truth[i] || !truth[i]->is_valid()) {
      model.reset();
      continue;
    }
    if (!model) {
      if (truth[i]->width() < 4.0 || truth[i]->height() < 4.0) continue;
      model = train_kcf(frames[i], *truth[i], params);
      continue;
    }
    const KcfDetection det = detect_kcf(*model, frames[i]);
    values.push_back(apce(det.response));
    model = update_model(*model, frames[i], det.position);
  }
  if (values.empty()) throw Error("calibration sequence has no trackable frames");
  std::sort(values.begin(), values.end());
  const double rank = std::clamp(percentile, 0.0, 100.0) / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const auto hi = static_cast<std::size_t>(std::ceil(rank));
  return values[lo] + (values[hi] - values[lo]) * (rank - static_cast<double>(lo));
}

}  // namespace aerotrack
