#include "aerotrack/bench.hpp"
#include "aerotrack/dataset.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <fstream>
#include <sstream>

using namespace aerotrack;

namespace {

const CameraModel kCam;

std::vector<std::optional<BoundingBox>> truth_track(DatasetManeuver m, const DatasetConfig& config) {
  WorldState state;
  state.chaser.position = {0.0, 0.0, 50.0};
  std::vector<std::optional<BoundingBox>> out;
  for (int k = 0; k < config.frames; ++k) {
    const Eigen::Vector3d off = dataset_offset(m, config, k);
    state.target.position = state.chaser.position + Eigen::Vector3d(off.x(), -off.y(), -off.z());
    out.push_back(ground_truth_box(state, kCam, SceneConfig{}));
  }
  return out;
}

std::string error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

void write_gt(const std::filesystem::path& p, const std::string& body) {
  std::ofstream out(p);
  out << "tick,x_min,y_min,x_max,y_max,visible\n" << body;
}

}  // namespace

TEST(Dataset, LineCentersAreCollinear) {
  const auto truth = truth_track(DatasetManeuver::Line, DatasetConfig{});
  std::vector<PixelPoint> pts;
  for (const auto& b : truth)
    if (b) pts.push_back(bbox_center(*b));
  ASSERT_GT(pts.size(), 100u);
  // Total least squares line through the centroid.
  Eigen::MatrixXd m(pts.size(), 2);
  for (std::size_t i = 0; i < pts.size(); ++i) m.row(i) << pts[i].u, pts[i].v;
  const Eigen::RowVector2d mean = m.colwise().mean();
  m.rowwise() -= mean;
  const Eigen::Matrix2d cov = m.transpose() * m;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(cov);
  const Eigen::Vector2d normal = es.eigenvectors().col(0);
  for (Eigen::Index i = 0; i < m.rows(); ++i) EXPECT_LT(std::abs(m.row(i).dot(normal)), 2.0) << i;
}

TEST(Dataset, CircleClosesOnItself) {
  const auto truth = truth_track(DatasetManeuver::Circle, DatasetConfig{});
  std::optional<PixelPoint> first, last;
  for (const auto& b : truth)
    if (b) {
      if (!first) first = bbox_center(*b);
      last = bbox_center(*b);
    }
  ASSERT_TRUE(first && last);
  EXPECT_LT(std::hypot(first->u - last->u, first->v - last->v), 5.0);
}

TEST(Dataset, EverySequenceLeavesTheImage) {
  for (DatasetManeuver m : all_dataset_maneuvers()) {
    const auto truth = truth_track(m, DatasetConfig{});
    const auto hidden = std::count(truth.begin(), truth.end(), std::nullopt);
    EXPECT_GT(hidden, 0) << to_string(m);
    EXPECT_GT(static_cast<long>(truth.size()) - hidden, static_cast<long>(truth.size()) / 2) << to_string(m);
  }
}

TEST(Dataset, RandomPathDependsOnSeed) {
  DatasetConfig a, b;
  b.seed = a.seed + 1;
  EXPECT_EQ(dataset_offset(DatasetManeuver::Random, a, 0), dataset_offset(DatasetManeuver::Random, a, 0));
  EXPECT_NE(dataset_offset(DatasetManeuver::Random, a, 300), dataset_offset(DatasetManeuver::Random, b, 300));
}

TEST(Dataset, ManeuverNames) {
  for (DatasetManeuver m : all_dataset_maneuvers()) EXPECT_EQ(parse_dataset_maneuver(to_string(m)), m);
  EXPECT_THROW(parse_dataset_maneuver("zigzag"), Error);
  DatasetConfig c;
  c.frames = 1;
  EXPECT_THROW(c.validate(), Error);
}

TEST(Dataset, WriteLoadRoundTrip) {
  DatasetConfig c;
  c.frames = 12;
  const Sequence seq = generate_sequence(DatasetManeuver::Sine, c, kCam, SceneConfig{});
  ASSERT_EQ(seq.frames.size(), 12u);
  const auto dir = fixtures::temp_dir("dataset_rt");
  write_sequence(dir / seq.name, seq);
  const Sequence back = load_sequence(dir / seq.name);
  EXPECT_EQ(back.name, "sine");
  ASSERT_EQ(back.frames.size(), seq.frames.size());
  for (std::size_t i = 0; i < seq.frames.size(); ++i) {
    EXPECT_EQ(back.frames[i].tick(), i);
    EXPECT_LE((back.frames[i].pixels() - seq.frames[i].pixels()).cwiseAbs().maxCoeff(), 1.0 / 255 + 1e-9);
    ASSERT_EQ(back.truth[i].has_value(), seq.truth[i].has_value());
    if (seq.truth[i]) {
      EXPECT_NEAR(back.truth[i]->x_min, seq.truth[i]->x_min, 1e-6);
    }
  }
  EXPECT_EQ(list_sequences(dir), std::vector<std::filesystem::path>{dir / "sine"});
}

TEST(Dataset, MalformedGroundTruthNamesTheLine) {
  const auto dir = fixtures::temp_dir("dataset_bad");
  write_gt(dir / "a.csv", "0,1,2,3,4,1\n1,1,2,3\n");
  EXPECT_NE(error_of([&] { read_ground_truth(dir / "a.csv"); }).find("line 3"), std::string::npos);
  write_gt(dir / "b.csv", "0,1,2,3,x,1\n");
  EXPECT_NE(error_of([&] { read_ground_truth(dir / "b.csv"); }).find("line 2: malformed number"), std::string::npos);
  write_gt(dir / "c.csv", "0,1,2,3,4,1\n2,1,2,3,4,1\n");
  EXPECT_NE(error_of([&] { read_ground_truth(dir / "c.csv"); }).find("line 3"), std::string::npos);
  write_gt(dir / "d.csv", "0,1,2,3,4,2\n");
  EXPECT_NE(error_of([&] { read_ground_truth(dir / "d.csv"); }).find("line 2"), std::string::npos);
  write_gt(dir / "e.csv", "0,-1,-1,-1,-1,0\n1,1,2,3,4,1\n");
  const auto ok = read_ground_truth(dir / "e.csv");
  ASSERT_EQ(ok.size(), 2u);
  EXPECT_FALSE(ok[0]);
  EXPECT_EQ(ok[1]->x_max, 3.0);
  EXPECT_THROW(list_sequences(dir / "nowhere"), Error);
  EXPECT_THROW(list_sequences(dir), Error);
}

TEST(Bench, AggregateKeepsMeanInsideRange) {
  const Stat s = aggregate({3.0, 1.0, 2.0});
  EXPECT_EQ(s.min, 1.0);
  EXPECT_EQ(s.max, 3.0);
  EXPECT_EQ(s.mean, 2.0);
  const Stat same = aggregate({0.1, 0.1, 0.1});
  EXPECT_EQ(same.mean, 0.1);
  EXPECT_THROW(aggregate({}), Error);
}

TEST(Bench, CenterRmseExamples) {
  const BoundingBox at100{90, 90, 110, 110};
  const std::vector<std::optional<BoundingBox>> truth{at100, at100, std::nullopt, at100};
  const PixelPoint fb{160, 120};
  // Exact estimates.
  EXPECT_EQ(center_rmse({PixelPoint{100, 100}, PixelPoint{100, 100}, std::nullopt, PixelPoint{100, 100}}, truth, fb),
            0.0);
  // Constant 3-4-5 offset.
  EXPECT_NEAR(center_rmse({PixelPoint{103, 104}, PixelPoint{103, 104}, PixelPoint{0, 0}, PixelPoint{103, 104}},
                          truth, fb),
              5.0, 1e-12);
  // First estimate missing uses the fallback (60, 20 off = 20*sqrt(10)); the last holds (103, 104).
  const double expect = std::sqrt((60.0 * 60 + 20.0 * 20 + 25 + 25) / 3.0);
  EXPECT_NEAR(center_rmse({std::nullopt, PixelPoint{103, 104}, std::nullopt, std::nullopt}, truth, fb), expect,
              1e-12);
  EXPECT_THROW(center_rmse({std::nullopt}, truth, fb), Error);
}

TEST(Bench, SummaryRecomputesFromRows) {
  std::vector<SequenceResult> rows;
  const double fps[] = {10, 30, 20};
  for (int i = 0; i < 3; ++i) {
    SequenceResult r;
    r.sequence = "s" + std::to_string(i);
    r.algorithm = BenchAlgorithm::Fused;
    r.frames = 100;
    r.visible_frames = 50 + 10 * i;
    r.detector_calls = 5 + i;
    r.in_view_detector_calls = 3 + i;
    r.fps = fps[i];
    r.rmse = 1.0 + i;
    rows.push_back(r);
  }
  const BenchReport rep = summarize_bench(rows);
  ASSERT_EQ(rep.summary.size(), 1u);
  const AlgorithmSummary& s = rep.get(BenchAlgorithm::Fused);
  EXPECT_EQ(s.fps.min, 10.0);
  EXPECT_EQ(s.fps.max, 30.0);
  EXPECT_EQ(s.fps.mean, 20.0);
  EXPECT_EQ(s.rmse.mean, 2.0);
  EXPECT_DOUBLE_EQ(s.detector_fraction, 18.0 / 300.0);
  EXPECT_DOUBLE_EQ(s.in_view_detector_fraction, 12.0 / 180.0);
  EXPECT_THROW(rep.get(BenchAlgorithm::KcfOnly), Error);
}

TEST(Bench, RunOnShortSequences) {
  DatasetConfig c;
  c.frames = 40;
  std::vector<Sequence> seqs;
  for (DatasetManeuver m : {DatasetManeuver::Line, DatasetManeuver::Circle})
    seqs.push_back(generate_sequence(m, c, kCam, SceneConfig{}));
  BenchConfig cfg;
  cfg.frame_limit = 30;
  const BenchReport rep = run_bench(seqs, cfg);
  ASSERT_EQ(rep.rows.size(), 6u);
  for (const auto& r : rep.rows) {
    EXPECT_EQ(r.frames, 30);
    EXPECT_LE(r.in_view_detector_calls, r.detector_calls);
    EXPECT_LE(r.detector_calls, r.frames);
    EXPECT_GE(r.rmse, 0.0);
    EXPECT_TRUE(std::isfinite(r.rmse));
    if (r.algorithm == BenchAlgorithm::DetectorEveryFrame) {
      EXPECT_EQ(r.detector_calls, r.frames);
    }
    if (r.algorithm == BenchAlgorithm::KcfOnly) {
      EXPECT_EQ(r.detector_calls, 0);
    }
  }
  for (const auto& s : rep.summary) {
    EXPECT_LE(s.fps.min, s.fps.mean);
    EXPECT_LE(s.fps.mean, s.fps.max);
    EXPECT_LE(s.rmse.min, s.rmse.mean);
    EXPECT_LE(s.rmse.mean, s.rmse.max);
  }
  // Same seed, same estimates.
  const BenchReport again = run_bench(seqs, cfg);
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    EXPECT_EQ(again.rows[i].rmse, rep.rows[i].rmse);
    EXPECT_EQ(again.rows[i].detector_calls, rep.rows[i].detector_calls);
  }
  std::ostringstream out;
  write_bench_report(out, rep);
  const std::string text = out.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1 + 6 + 1 + 1 + 3);
  EXPECT_THROW(run_bench({}, cfg), Error);
}
