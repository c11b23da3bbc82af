#pragma once

#include "aerotrack/imaging.hpp"
#include "aerotrack/render.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace aerotrack {

enum class DatasetManeuver { Line, Sine, Circle, Random };
std::string to_string(DatasetManeuver m);
DatasetManeuver parse_dataset_maneuver(const std::string& text);
const std::vector<DatasetManeuver>& all_dataset_maneuvers();

/// Perception sequences seen from a static chaser hovering at the spawn pose.
struct DatasetConfig {
  int frames = 600;
  double depth = 2.0;  // nominal target depth, m
  std::uint64_t seed = 11;

  void validate() const;
};

struct Sequence {
  std::string name;
  std::vector<Frame> frames;
  std::vector<std::optional<BoundingBox>> truth;  // absent while the target center is out of view
};

/// Target position relative to the chaser in the body frame (forward, right, down) at frame k.
Eigen::Vector3d dataset_offset(DatasetManeuver maneuver, const DatasetConfig& config, int k);

Sequence generate_sequence(DatasetManeuver maneuver, const DatasetConfig& config, const CameraModel& camera,
                           const SceneConfig& scene);

/// Frames as frame_%06d.pgm plus gt.csv (tick,x_min,y_min,x_max,y_max,visible) in `dir`.
void write_sequence(const std::filesystem::path& dir, const Sequence& sequence);
Sequence load_sequence(const std::filesystem::path& dir);

std::vector<std::optional<BoundingBox>> read_ground_truth(const std::filesystem::path& gt_csv);

/// Every sub-directory of `root` holding a gt.csv, sorted by name.
std::vector<std::filesystem::path> list_sequences(const std::filesystem::path& root);

}  // namespace aerotrack
