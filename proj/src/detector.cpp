#include "aerotrack/detector.hpp"

#include <algorithm>
#include <chrono>
#include <thread>

namespace aerotrack {

void DetectorConfig::validate() const {
  auto prob = [](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) throw Error(std::string("detector ") + name + " must lie in [0, 1]");
  };
  prob(miss_prob, "miss_prob");
  prob(false_positive_prob, "false_positive_prob");
  prob(confidence_mean, "confidence_mean");
  if (!(center_noise_sigma >= 0.0) || !(size_noise_sigma >= 0.0) || !(confidence_sigma >= 0.0))
    throw Error("detector sigmas must be non-negative");
  if (!(latency_ms >= 0.0)) throw Error("detector latency_ms must be non-negative");
  if (!(min_detectable_px >= 0.0)) throw Error("detector min_detectable_px must be non-negative");
}

void emulate_latency(double ms) {
  if (ms <= 0.0) return;
  using clock = std::chrono::steady_clock;
  const auto deadline = clock::now() + std::chrono::duration_cast<clock::duration>(
                                           std::chrono::duration<double, std::milli>(ms));
  // Sleep most of the interval, then spin so the call does not overshoot.
  const auto coarse = deadline - std::chrono::milliseconds(1);
  if (clock::now() < coarse) std::this_thread::sleep_until(coarse);
  while (clock::now() < deadline) {
  }
}

namespace {

double sample_confidence(const DetectorConfig& config, Rng& rng) {
  return std::clamp(normal(rng, config.confidence_mean, config.confidence_sigma), 0.0, 1.0);
}

Detection false_positive(int width, int height, const DetectorConfig& config, Rng& rng) {
  const double side = 8.0 + 40.0 * uniform01(rng);
  const double u = uniform01(rng) * width;
  const double v = uniform01(rng) * height;
  Detection det{BoundingBox::centered({u, v}, side, side), sample_confidence(config, rng)};
  if (det.box.is_sentinel()) det.confidence = 0.0;
  return det;
}

}  // namespace

Detection detect(const Frame& frame, const std::optional<BoundingBox>& truth,
                 const DetectorConfig& config, Rng& rng) {
  return detect(frame.width(), frame.height(), truth, config, rng);
}

Detection detect(int width, int height, const std::optional<BoundingBox>& truth,
                 const DetectorConfig& config, Rng& rng) {
  Detection det;
  const bool resolvable = truth && truth->is_valid() &&
                          std::max(truth->width(), truth->height()) >= config.min_detectable_px;
  if (resolvable) {
    if (!bernoulli(rng, config.miss_prob)) {
      const PixelPoint c = bbox_center(*truth);
      const double u = normal(rng, c.u, config.center_noise_sigma);
      const double v = normal(rng, c.v, config.center_noise_sigma);
      const double w = std::max(1.0, truth->width() * (1.0 + normal(rng, 0.0, config.size_noise_sigma)));
      const double h = std::max(1.0, truth->height() * (1.0 + normal(rng, 0.0, config.size_noise_sigma)));
      det.box = BoundingBox::centered({u, v}, w, h);
      det.confidence = sample_confidence(config, rng);
      if (config.center_noise_sigma == 0.0 && config.size_noise_sigma == 0.0) det.box = *truth;
    }
  } else if (bernoulli(rng, config.false_positive_prob)) {
    det = false_positive(width, height, config, rng);
  }
  emulate_latency(config.latency_ms);
  return det;
}

bool is_valid(const Detection& det, double threshold) {
  return !det.box.is_sentinel() && det.confidence >= threshold;
}

OracleDetector::OracleDetector(TruthLookup truth, DetectorConfig config, std::uint64_t seed)
    : truth_(std::move(truth)), config_(config), seed_(seed) {
  config_.validate();
}

Detection OracleDetector::detect(const Frame& frame) {
  ++calls_;
  Rng rng = make_stream(seed_, "detector-frame", frame.tick());
  return aerotrack::detect(frame, truth_(frame.tick()), config_, rng);
}

}  // namespace aerotrack
