#include "aerotrack/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace aerotrack {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Triangle wave with period 1, starting at 0 and rising to 1 at x = 0.25.
double triangle(double x) { return 2.0 / std::numbers::pi * std::asin(std::sin(kTwoPi * x)); }

struct RandomPath {
  double amp[2][3];
  double freq[2][3];
  double phase[2][3];
  double depth_phase;
  double bump_center;
  double bump_sign;
};

RandomPath random_path(std::uint64_t seed) {
  Rng rng = make_stream(seed, "dataset-random-path");
  RandomPath p{};
  for (int axis = 0; axis < 2; ++axis)
    for (int j = 0; j < 3; ++j) {
      p.amp[axis][j] = (axis == 0 ? 0.55 : 0.35) * (0.5 + 0.5 * uniform01(rng));
      p.freq[axis][j] = 0.5 + 2.5 * uniform01(rng);
      p.phase[axis][j] = kTwoPi * uniform01(rng);
    }
  p.depth_phase = kTwoPi * uniform01(rng);
  p.bump_center = 0.3 + 0.4 * uniform01(rng);
  p.bump_sign = bernoulli(rng, 0.5) ? 1.0 : -1.0;
  return p;
}

}  // namespace

std::string to_string(DatasetManeuver m) {
  switch (m) {
    case DatasetManeuver::Line: return "line";
    case DatasetManeuver::Sine: return "sine";
    case DatasetManeuver::Circle: return "circle";
    case DatasetManeuver::Random: return "random";
  }
  return "unknown";
}

DatasetManeuver parse_dataset_maneuver(const std::string& text) {
  for (DatasetManeuver m : all_dataset_maneuvers())
    if (to_string(m) == text) return m;
  throw Error("unknown dataset maneuver: " + text);
}

const std::vector<DatasetManeuver>& all_dataset_maneuvers() {
  static const std::vector<DatasetManeuver> all{DatasetManeuver::Line, DatasetManeuver::Sine,
                                                DatasetManeuver::Circle, DatasetManeuver::Random};
  return all;
}

void DatasetConfig::validate() const {
  if (frames < 2) throw Error("a sequence needs at least 2 frames");
  if (!(depth > 0.0)) throw Error("dataset depth must be positive");
}

Eigen::Vector3d dataset_offset(DatasetManeuver maneuver, const DatasetConfig& config, int k) {
  const double s = static_cast<double>(k) / (config.frames - 1);
  const double d = config.depth;
  switch (maneuver) {
    case DatasetManeuver::Line: {
      // Ping-pong along a tilted line whose ends lie beyond the left and right image edges.
      const double t = 2.9 * triangle(2.0 * s);
      const double angle = 20.0 * std::numbers::pi / 180.0;
      return {d, t * std::cos(angle), t * std::sin(angle)};
    }
    case DatasetManeuver::Sine:
      return {d, 2.7 * triangle(1.5 * s), 0.7 * std::sin(kTwoPi * 5.0 * s)};
    case DatasetManeuver::Circle: {
      // Three loops starting on the left; the right side of the loop leaves the image.
      const double theta = std::numbers::pi + kTwoPi * 3.0 * s;
      return {d, 1.0 + 1.4 * std::cos(theta), 1.4 * std::sin(theta)};
    }
    case DatasetManeuver::Random: {
      const RandomPath p = random_path(config.seed);
      double lateral[2] = {0.0, 0.0};
      for (int axis = 0; axis < 2; ++axis)
        for (int j = 0; j < 3; ++j)
          lateral[axis] += p.amp[axis][j] * (std::sin(kTwoPi * p.freq[axis][j] * s + p.phase[axis][j]) -
                                             std::sin(p.phase[axis][j]));
      // Forced excursion: a raised-cosine push that carries the target out of the image.
      const double half_width = 0.125;
      const double x = (s - p.bump_center) / half_width;
      if (std::abs(x) < 1.0) lateral[0] += p.bump_sign * 3.2 * 0.5 * (1.0 + std::cos(std::numbers::pi * x));
      const double depth = d * (1.0 + 0.15 * std::sin(kTwoPi * 1.3 * s + p.depth_phase));
      return {depth, lateral[0], lateral[1]};
    }
  }
  throw Error("unknown dataset maneuver");
}

Sequence generate_sequence(DatasetManeuver maneuver, const DatasetConfig& config, const CameraModel& camera,
                           const SceneConfig& scene) {
  config.validate();
  camera.validate();
  Sequence seq;
  seq.name = to_string(maneuver);
  Rng noise = make_stream(config.seed, "dataset-render-" + seq.name);
  WorldState state;
  state.chaser.position = {0.0, 0.0, 50.0};
  for (int k = 0; k < config.frames; ++k) {
    const Eigen::Vector3d off = dataset_offset(maneuver, config, k);
    state.tick = static_cast<std::uint64_t>(k);
    state.target.position = state.chaser.position + Eigen::Vector3d(off.x(), -off.y(), -off.z());
    RenderResult r = render(state, camera, scene, noise);
    seq.frames.push_back(std::move(r.frame));
    seq.truth.push_back(r.truth);
  }
  return seq;
}

void write_sequence(const std::filesystem::path& dir, const Sequence& sequence) {
  std::filesystem::create_directories(dir);
  std::ofstream gt(dir / "gt.csv", std::ios::trunc);
  if (!gt) throw Error("cannot write " + (dir / "gt.csv").string());
  gt.precision(10);
  gt << "tick,x_min,y_min,x_max,y_max,visible\n";
  for (std::size_t i = 0; i < sequence.frames.size(); ++i) {
    const Frame& f = sequence.frames[i];
    write_pgm(dir / frame_filename(f.tick()), f);
    const BoundingBox b = sequence.truth[i].value_or(BoundingBox::sentinel());
    gt << f.tick() << ',' << b.x_min << ',' << b.y_min << ',' << b.x_max << ',' << b.y_max << ','
       << (sequence.truth[i] ? 1 : 0) << '\n';
  }
}

std::vector<std::optional<BoundingBox>> read_ground_truth(const std::filesystem::path& gt_csv) {
  std::ifstream in(gt_csv);
  if (!in) throw Error("cannot open ground truth: " + gt_csv.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("tick,", 0) != 0)
    throw Error(gt_csv.string() + " line 1: missing header");
  std::vector<std::optional<BoundingBox>> out;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    const std::string where = gt_csv.string() + " line " + std::to_string(line_no);
    if (fields.size() != 6) throw Error(where + ": expected 6 fields");
    try {
      std::size_t used = 0;
      const unsigned long long tick = std::stoull(fields[0], &used);
      if (used != fields[0].size()) throw Error("bad tick");
      if (tick != out.size()) throw Error("ticks must be consecutive from 0");
      double v[4];
      for (int j = 0; j < 4; ++j) {
        v[j] = std::stod(fields[j + 1], &used);
        if (used != fields[j + 1].size()) throw Error("bad coordinate");
      }
      if (fields[5] == "1") {
        const BoundingBox box{v[0], v[1], v[2], v[3]};
        if (!box.is_valid()) throw Error("visible row with an invalid box");
        out.emplace_back(box);
      } else if (fields[5] == "0") {
        out.emplace_back(std::nullopt);
      } else {
        throw Error("visible must be 0 or 1");
      }
    } catch (const Error& e) {
      throw Error(where + ": " + e.what());
    } catch (const std::exception&) {
      throw Error(where + ": malformed number");
    }
  }
  return out;
}

Sequence load_sequence(const std::filesystem::path& dir) {
  Sequence seq;
  seq.name = dir.filename().string();
  seq.truth = read_ground_truth(dir / "gt.csv");
  seq.frames.reserve(seq.truth.size());
  for (std::size_t i = 0; i < seq.truth.size(); ++i) seq.frames.push_back(read_pgm(dir / frame_filename(i)));
  return seq;
}

std::vector<std::filesystem::path> list_sequences(const std::filesystem::path& root) {
  if (!std::filesystem::is_directory(root)) throw Error("dataset directory not found: " + root.string());
  std::vector<std::filesystem::path> out;
  for (const auto& entry : std::filesystem::directory_iterator(root))
    if (entry.is_directory() && std::filesystem::exists(entry.path() / "gt.csv")) out.push_back(entry.path());
  std::sort(out.begin(), out.end());
  if (out.empty()) throw Error("no sequences in " + root.string());
  return out;
}

}  // namespace aerotrack
