#include "aerotrack/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <ostream>

namespace aerotrack {

std::string to_string(BenchAlgorithm alg) {
  switch (alg) {
    case BenchAlgorithm::DetectorEveryFrame: return "detector";
    case BenchAlgorithm::KcfOnly: return "kcf";
    case BenchAlgorithm::Fused: return "fused";
  }
  return "unknown";
}

Stat aggregate(const std::vector<double>& values) {
  if (values.empty()) throw Error("nothing to aggregate");
  Stat s;
  s.min = *std::min_element(values.begin(), values.end());
  s.max = *std::max_element(values.begin(), values.end());
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  // Rounding in the mean must not break min <= mean <= max.
  s.mean = std::clamp(s.mean, s.min, s.max);
  return s;
}

const AlgorithmSummary& BenchReport::get(BenchAlgorithm alg) const {
  for (const auto& s : summary)
    if (s.algorithm == alg) return s;
  throw Error("no bench results for " + to_string(alg));
}

double center_rmse(const std::vector<std::optional<PixelPoint>>& estimates,
                   const std::vector<std::optional<BoundingBox>>& truth, PixelPoint fallback) {
  if (estimates.size() != truth.size()) throw Error("estimate and truth lengths differ");
  PixelPoint held = fallback;
  double sum = 0.0;
  int n = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (estimates[i]) held = *estimates[i];
    if (!truth[i]) continue;
    const double e = distance(held, bbox_center(*truth[i]));
    sum += e * e;
    ++n;
  }
  return n > 0 ? std::sqrt(sum / n) : 0.0;
}

SequenceResult run_sequence(BenchAlgorithm alg, const Sequence& sequence, const BenchConfig& config) {
  const std::size_t total = sequence.frames.size();
  const std::size_t n = config.frame_limit > 0 ? std::min<std::size_t>(total, config.frame_limit) : total;
  if (n == 0) throw Error("empty sequence: " + sequence.name);
  const std::vector<std::optional<BoundingBox>> truth(sequence.truth.begin(), sequence.truth.begin() + n);

  SequenceResult row;
  row.sequence = sequence.name;
  row.algorithm = alg;
  row.frames = static_cast<int>(n);
  row.visible_frames = static_cast<int>(std::count_if(truth.begin(), truth.end(), [](const auto& t) { return t.has_value(); }));

  Rng seed_rng = make_stream(config.seed, "bench-" + sequence.name);
  OracleDetector detector(
      [&truth](std::uint64_t tick) -> std::optional<BoundingBox> {
        return tick < truth.size() ? truth[tick] : std::nullopt;
      },
      config.detector, seed_rng());

  std::vector<std::optional<PixelPoint>> estimates(n);
  std::vector<bool> called(n, false);
  const auto start = std::chrono::steady_clock::now();
  switch (alg) {
    case BenchAlgorithm::DetectorEveryFrame:
      for (std::size_t i = 0; i < n; ++i) {
        const Detection det = detector.detect(sequence.frames[i]);
        called[i] = true;
        if (is_valid(det, config.thresholds.confidence)) estimates[i] = bbox_center(det.box);
      }
      break;
    case BenchAlgorithm::KcfOnly: {
      if (!truth[0]) throw Error(sequence.name + ": KCF-only needs a visible target in frame 0");
      KcfModel model = train_kcf(sequence.frames[0], *truth[0], config.kcf);
      estimates[0] = model.center;
      for (std::size_t i = 1; i < n; ++i) {
        const KcfDetection det = detect_kcf(model, sequence.frames[i]);
        model = update_model(model, sequence.frames[i], det.position);
        estimates[i] = det.position;
      }
      break;
    }
    case BenchAlgorithm::Fused: {
      FusionEstimator estimator(config.thresholds, config.kcf);
      for (std::size_t i = 0; i < n; ++i) {
        const TargetEstimate est = estimator.process(sequence.frames[i], detector);
        called[i] = est.detector_invoked;
        if (est.valid) estimates[i] = est.center;
      }
      break;
    }
  }
  row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  row.fps = row.seconds > 0.0 ? static_cast<double>(n) / row.seconds : 0.0;

  for (std::size_t i = 0; i < n; ++i) {
    if (!called[i]) continue;
    ++row.detector_calls;
    if (truth[i]) ++row.in_view_detector_calls;
  }
  row.detector_fraction = static_cast<double>(row.detector_calls) / row.frames;
  row.in_view_detector_fraction =
      row.visible_frames > 0 ? static_cast<double>(row.in_view_detector_calls) / row.visible_frames : 0.0;

  const Frame& f0 = sequence.frames[0];
  row.rmse = center_rmse(estimates, truth, {f0.width() / 2.0, f0.height() / 2.0});
  return row;
}

BenchReport summarize_bench(std::vector<SequenceResult> rows) {
  BenchReport report;
  report.rows = std::move(rows);
  for (BenchAlgorithm alg : {BenchAlgorithm::DetectorEveryFrame, BenchAlgorithm::KcfOnly, BenchAlgorithm::Fused}) {
    std::vector<double> fps, rmse;
    long frames = 0, visible = 0, calls = 0, in_view_calls = 0;
    for (const auto& r : report.rows) {
      if (r.algorithm != alg) continue;
      fps.push_back(r.fps);
      rmse.push_back(r.rmse);
      frames += r.frames;
      visible += r.visible_frames;
      calls += r.detector_calls;
      in_view_calls += r.in_view_detector_calls;
    }
    if (fps.empty()) continue;
    AlgorithmSummary s;
    s.algorithm = alg;
    s.fps = aggregate(fps);
    s.rmse = aggregate(rmse);
    s.detector_fraction = static_cast<double>(calls) / static_cast<double>(frames);
    s.in_view_detector_fraction = visible > 0 ? static_cast<double>(in_view_calls) / static_cast<double>(visible) : 0.0;
    report.summary.push_back(s);
  }
  return report;
}

BenchReport run_bench(const std::vector<Sequence>& sequences, const BenchConfig& config,
                      const std::vector<BenchAlgorithm>& algorithms) {
  if (sequences.empty()) throw Error("no sequences to benchmark");
  config.detector.validate();
  config.thresholds.validate();
  config.kcf.validate();
  std::vector<SequenceResult> rows;
  for (BenchAlgorithm alg : algorithms)
    for (const auto& seq : sequences) rows.push_back(run_sequence(alg, seq, config));
  return summarize_bench(std::move(rows));
}

void write_bench_report(std::ostream& out, const BenchReport& report) {
  out << "sequence,algorithm,frames,visible_frames,seconds,fps,rmse,detector_fraction,in_view_detector_fraction\n";
  for (const auto& r : report.rows)
    out << r.sequence << ',' << to_string(r.algorithm) << ',' << r.frames << ',' << r.visible_frames << ','
        << r.seconds << ',' << r.fps << ',' << r.rmse << ',' << r.detector_fraction << ','
        << r.in_view_detector_fraction << '\n';
  out << "\nalgorithm,fps_min,fps_max,fps_mean,rmse_min,rmse_max,rmse_mean,detector_fraction,"
         "in_view_detector_fraction\n";
  for (const auto& s : report.summary)
    out << to_string(s.algorithm) << ',' << s.fps.min << ',' << s.fps.max << ',' << s.fps.mean << ',' << s.rmse.min
        << ',' << s.rmse.max << ',' << s.rmse.mean << ',' << s.detector_fraction << ','
        << s.in_view_detector_fraction << '\n';
}

}  // namespace aerotrack
