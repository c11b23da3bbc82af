#pragma once

#include "aerotrack/bench.hpp"
#include "aerotrack/dataset.hpp"
#include "aerotrack/env.hpp"
#include "aerotrack/episodes.hpp"
#include "aerotrack/ibvs.hpp"
#include "aerotrack/ppo.hpp"

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace aerotrack {

struct GeneralConfig {
  std::uint64_t seed = 0;
  ControllerKind controller = ControllerKind::Pid;
  Perception perception = Perception::OracleDirect;
  std::string checkpoint;  // policy file for controller = rl; empty means the latest in the run dir
  int episodes = 25;
  bool greedy = false;  // true: rl controller takes the most likely action instead of sampling
};

/// Everything a run needs. Every field has a default; files and overrides only change known keys.
struct RunConfig {
  GeneralConfig general;
  CameraModel camera;
  DetectorConfig detector;
  KcfParams kcf;
  FusionThresholds estimator;
  DynamicsConfig dynamics;
  ManeuverDistribution maneuvers;
  double altitude = 50.0;
  EpisodeConfig episode;
  int eval_max_steps = 1000;
  PpoConfig ppo;
  IbvsGains ibvs;
  DatasetConfig dataset;
  SceneConfig scene;

  void validate() const;
};

/// One "section.key" entry of the configuration file.
struct ConfigKey {
  std::string section;
  std::string key;
  std::function<std::string()> get;
  std::function<void(const std::string&)> set;
};

std::vector<ConfigKey> config_keys(RunConfig& config);

/// Case-study maneuver presets: cs1, cs2-low, cs2-high.
void apply_preset(RunConfig& config, const std::string& name);

/// Reads an INI file on top of `base`. Unknown sections or keys are errors.
RunConfig load_config(const std::filesystem::path& path, RunConfig base = {});

/// Applies "section.key=value".
void apply_override(RunConfig& config, const std::string& assignment);

/// Writes every key, so the output reproduces the configuration exactly.
void write_config(std::ostream& out, const RunConfig& config);
void write_config(const std::filesystem::path& path, const RunConfig& config);

/// Environment for training (episode.max_steps) or evaluation (episode.eval_max_steps).
EnvConfig make_env_config(const RunConfig& config, bool evaluation);

BenchConfig make_bench_config(const RunConfig& config);

}  // namespace aerotrack
