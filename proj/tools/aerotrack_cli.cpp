#include "aerotrack/commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <iostream>

using namespace aerotrack;

namespace {

struct Common {
  std::string config_file;
  std::string preset;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;

  RunConfig build() const {
    RunConfig cfg;
    if (!config_file.empty()) cfg = load_config(config_file, cfg);
    if (!preset.empty()) apply_preset(cfg, preset);
    for (const auto& o : overrides) apply_override(cfg, o);
    if (seed) cfg.general.seed = *seed;
    cfg.validate();
    return cfg;
  }
};

void print_summary(const EvalSummary& s) {
  std::cout << "episodes " << s.episodes << "\n"
            << "length median " << s.length.median << " iqr " << s.length.iqr() << "\n"
            << "average_distance median " << s.average_distance.median << " iqr " << s.average_distance.iqr()
            << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Active visual tracking: simulator, estimator benchmark and controllers"};
  app.require_subcommand(1);

  Common common;
  app.add_option("-c,--config", common.config_file, "INI configuration file")->check(CLI::ExistingFile);
  app.add_option("-p,--preset", common.preset, "maneuver preset: cs1, cs2-low, cs2-high");
  app.add_option("-s,--set", common.overrides, "override, section.key=value (repeatable)");
  app.add_option("--seed", common.seed, "root seed");

  std::string run_dir = "run";
  bool resume = false;
  auto* train = app.add_subcommand("train", "train the PPO policy");
  train->add_option("-o,--out", run_dir, "run directory");
  train->add_flag("--resume", resume, "continue from the latest checkpoint");

  std::string controller;
  std::optional<int> episodes;
  auto* eval = app.add_subcommand("eval", "evaluate a controller over seeded episodes");
  eval->add_option("-o,--out", run_dir, "run directory (checkpoints are looked up here)");
  eval->add_option("--controller", controller, "rl, pid, random or hover");
  eval->add_option("-n,--episodes", episodes, "number of episodes");

  std::string dataset_dir = "dataset";
  std::vector<std::string> maneuvers{"line", "sine", "circle", "random"};
  auto* gen = app.add_subcommand("gen-dataset", "render perception benchmark sequences");
  gen->add_option("-o,--out", dataset_dir, "output directory");
  gen->add_option("-m,--maneuvers", maneuvers, "subset of line, sine, circle, random");

  std::string report;
  int frame_limit = 0;
  auto* bench = app.add_subcommand("bench-estimator", "FPS and RMSE of detector, KCF and fused estimator");
  bench->add_option("-d,--dataset", dataset_dir, "dataset directory")->check(CLI::ExistingDirectory);
  bench->add_option("-r,--report", report, "report file");
  bench->add_option("--frames", frame_limit, "frames per sequence (0 = all)");

  int episode = 0;
  std::string replay_out = "replay";
  auto* replay = app.add_subcommand("replay", "plot data and annotated frames of an evaluated episode");
  replay->add_option("-r,--run", run_dir, "eval run directory")->check(CLI::ExistingDirectory);
  replay->add_option("-e,--episode", episode, "episode index");
  replay->add_option("-o,--out", replay_out, "output directory");

  int tune_episodes = 3;
  auto* tune = app.add_subcommand("tune-pid", "grid-search the IBVS gains");
  tune->add_option("-o,--out", run_dir, "run directory");
  tune->add_option("-n,--episodes", tune_episodes, "episodes per candidate");

  double percentile = 5.0;
  auto* calib = app.add_subcommand("calibrate-apce", "APCE percentile of clean KCF tracking per sequence");
  calib->add_option("-d,--dataset", dataset_dir, "dataset directory")->check(CLI::ExistingDirectory);
  calib->add_option("--percentile", percentile, "percentile");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    RunConfig cfg = common.build();
    if (*train) {
      const TrainResult r = cmd_train(cfg, run_dir, resume, &std::cout);
      std::cout << "trained " << r.timesteps << " timesteps into " << run_dir << "\n";
    } else if (*eval) {
      if (!controller.empty()) cfg.general.controller = parse_controller(controller);
      if (episodes) cfg.general.episodes = *episodes;
      cfg.validate();
      print_summary(cmd_eval(cfg, run_dir).summary);
    } else if (*gen) {
      std::vector<DatasetManeuver> list;
      for (const auto& m : maneuvers) list.push_back(parse_dataset_maneuver(m));
      cmd_gen_dataset(cfg, list, dataset_dir);
      std::cout << "wrote " << list.size() << " sequences to " << dataset_dir << "\n";
    } else if (*bench) {
      const BenchReport r = cmd_bench_estimator(dataset_dir, cfg, report, frame_limit);
      write_bench_report(std::cout, r);
    } else if (*replay) {
      const ReplaySummary r = cmd_replay(run_dir, episode, replay_out);
      std::cout << "replayed " << r.rows << " steps into " << replay_out << "\n";
    } else if (*tune) {
      const TuneResult r = cmd_tune_pid(cfg, run_dir, tune_episodes);
      std::cout << "best k_u " << r.best.k_u << " k_v " << r.best.k_v << " k_z " << r.best.k_z << " k_psi "
                << r.best.k_psi << "\n";
    } else if (*calib) {
      const ApceCalibration c = cmd_calibrate_apce(dataset_dir, cfg, percentile);
      for (const auto& [name, v] : c.per_sequence) std::cout << name << ' ' << v << "\n";
      std::cout << "suggested_apce " << c.suggested << "\n";
    }
  } catch (const std::exception& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    std::cerr << "error: " << msg << "\n";
    return 1;
  }
  return 0;
}
