#pragma once

#include "aerotrack/config.hpp"

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <vector>

namespace aerotrack {

/// Fails early when `dir` cannot be created or written.
void ensure_writable_dir(const std::filesystem::path& dir);

/// Snapshots config.ini into the run directory, then trains.
TrainResult cmd_train(const RunConfig& config, const std::filesystem::path& run_dir, bool resume,
                      std::ostream* progress = nullptr);

std::unique_ptr<Controller> make_controller(const RunConfig& config, const std::filesystem::path& run_dir);

struct EvalOutput {
  std::vector<EpisodeRecord> records;
  EvalSummary summary;
};

/// Writes config.ini, episodes.csv, summary.csv and trajectories/episode_NNN.jsonl.
EvalOutput cmd_eval(const RunConfig& config, const std::filesystem::path& run_dir);

void cmd_gen_dataset(const RunConfig& config, const std::vector<DatasetManeuver>& maneuvers,
                     const std::filesystem::path& out_dir);

/// Loads every sequence under `dataset_dir`, benchmarks all three estimators and writes the
/// report to `report_path` when it is non-empty.
BenchReport cmd_bench_estimator(const std::filesystem::path& dataset_dir, const RunConfig& config,
                                const std::filesystem::path& report_path, int frame_limit = 0);

struct ReplaySummary {
  int rows = 0;
  std::vector<int> action_histogram;  // kNumActions bins plus one for continuous commands
};

/// Reads trajectories/episode_NNN.jsonl from an eval run and writes plot.csv, actions.csv and
/// annotated frames under `out_dir`.
ReplaySummary cmd_replay(const std::filesystem::path& run_dir, int episode, const std::filesystem::path& out_dir);

std::filesystem::path trajectory_path(const std::filesystem::path& run_dir, int episode);

/// Grid search over IBVS gains; writes tune.csv and a config.ini holding the winner.
TuneResult cmd_tune_pid(const RunConfig& config, const std::filesystem::path& run_dir, int episodes,
                        const GainGrid& grid = {});

struct ApceCalibration {
  std::vector<std::pair<std::string, double>> per_sequence;
  double suggested = 0.0;  // smallest per-sequence percentile
};

ApceCalibration cmd_calibrate_apce(const std::filesystem::path& dataset_dir, const RunConfig& config,
                                   double percentile = 5.0);

}  // namespace aerotrack
