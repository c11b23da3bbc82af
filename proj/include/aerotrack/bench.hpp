#pragma once

#include "aerotrack/dataset.hpp"
#include "aerotrack/detector.hpp"
#include "aerotrack/fusion.hpp"
#include "aerotrack/kcf.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace aerotrack {

enum class BenchAlgorithm { DetectorEveryFrame, KcfOnly, Fused };
std::string to_string(BenchAlgorithm alg);

struct BenchConfig {
  DetectorConfig detector;
  FusionThresholds thresholds;
  KcfParams kcf;
  std::uint64_t seed = 0;
  int frame_limit = 0;  // frames used per sequence; 0 means all
};

struct SequenceResult {
  std::string sequence;
  BenchAlgorithm algorithm = BenchAlgorithm::Fused;
  int frames = 0;
  int visible_frames = 0;
  int detector_calls = 0;
  int in_view_detector_calls = 0;
  double seconds = 0.0;
  double fps = 0.0;
  double rmse = 0.0;                       // px, over frames with a visible target
  double detector_fraction = 0.0;          // detector calls / frames
  double in_view_detector_fraction = 0.0;  // detector calls / frames with a visible target
};

struct Stat {
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
};

Stat aggregate(const std::vector<double>& values);

struct AlgorithmSummary {
  BenchAlgorithm algorithm = BenchAlgorithm::Fused;
  Stat fps;
  Stat rmse;
  double detector_fraction = 0.0;          // pooled over all frames
  double in_view_detector_fraction = 0.0;  // pooled over visible frames
};

struct BenchReport {
  std::vector<SequenceResult> rows;
  std::vector<AlgorithmSummary> summary;

  const AlgorithmSummary& get(BenchAlgorithm alg) const;
};

/// Center RMSE over visible frames. An invalid estimate holds the last valid center; before the
/// first valid estimate the image center is used.
double center_rmse(const std::vector<std::optional<PixelPoint>>& estimates,
                   const std::vector<std::optional<BoundingBox>>& truth, PixelPoint fallback);

SequenceResult run_sequence(BenchAlgorithm alg, const Sequence& sequence, const BenchConfig& config);

BenchReport summarize_bench(std::vector<SequenceResult> rows);

BenchReport run_bench(const std::vector<Sequence>& sequences, const BenchConfig& config,
                      const std::vector<BenchAlgorithm>& algorithms = {BenchAlgorithm::DetectorEveryFrame,
                                                                       BenchAlgorithm::KcfOnly,
                                                                       BenchAlgorithm::Fused});

/// Per-sequence rows followed by a blank line and the per-algorithm aggregate table.
void write_bench_report(std::ostream& out, const BenchReport& report);

}  // namespace aerotrack
