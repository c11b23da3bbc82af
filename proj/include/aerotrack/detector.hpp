#pragma once

#include "aerotrack/imaging.hpp"
#include "aerotrack/rng.hpp"

#include <functional>
#include <optional>

namespace aerotrack {

struct Detection {
  BoundingBox box;          // sentinel when nothing was found
  double confidence = 0.0;  // 0 whenever box is the sentinel
};

/// Noise and latency model of the synthetic detector.
struct DetectorConfig {
  double miss_prob = 0.05;
  double center_noise_sigma = 2.0;  // px
  double size_noise_sigma = 0.05;   // relative
  double confidence_mean = 0.9;
  double confidence_sigma = 0.05;
  double false_positive_prob = 0.01;
  double latency_ms = 0.0;
  // Targets whose true box is smaller than this (largest side, px) are not resolvable.
  double min_detectable_px = 4.0;

  void validate() const;
};

/// Oracle detection from the simulator ground truth. `truth` is absent when the target is
/// outside the view. Blocks for config.latency_ms of wall time when positive.
Detection detect(const Frame& frame, const std::optional<BoundingBox>& truth,
                 const DetectorConfig& config, Rng& rng);

/// Same oracle without pixels; false positives are placed inside a width x height image.
Detection detect(int width, int height, const std::optional<BoundingBox>& truth,
                 const DetectorConfig& config, Rng& rng);

/// True iff the detection carries a real box with confidence >= threshold.
bool is_valid(const Detection& det, double threshold);

/// Blocks the calling thread for `ms` milliseconds of wall time.
void emulate_latency(double ms);

/// Seam between the estimator and whatever produces detections.
class Detector {
 public:
  virtual ~Detector() = default;
  virtual Detection detect(const Frame& frame) = 0;
};

/// Detector backed by per-tick ground truth. The noise for a frame is drawn from a stream keyed
/// by (seed, frame tick), so results do not depend on how often the detector is called.
class OracleDetector final : public Detector {
 public:
  using TruthLookup = std::function<std::optional<BoundingBox>(std::uint64_t tick)>;

  OracleDetector(TruthLookup truth, DetectorConfig config, std::uint64_t seed);

  Detection detect(const Frame& frame) override;
  std::size_t calls() const { return calls_; }

 private:
  TruthLookup truth_;
  DetectorConfig config_;
  std::uint64_t seed_;
  std::size_t calls_ = 0;
};

}  // namespace aerotrack
