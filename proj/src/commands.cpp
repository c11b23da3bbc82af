#include "aerotrack/commands.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace aerotrack {
namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out.precision(10);
  return out;
}

void draw_box(Image& px, const BoundingBox& box, double value) {
  const int w = static_cast<int>(px.cols()), h = static_cast<int>(px.rows());
  const int x0 = static_cast<int>(std::lround(box.x_min)), x1 = static_cast<int>(std::lround(box.x_max));
  const int y0 = static_cast<int>(std::lround(box.y_min)), y1 = static_cast<int>(std::lround(box.y_max));
  auto put = [&](int r, int c) {
    if (r >= 0 && r < h && c >= 0 && c < w) px(r, c) = value;
  };
  for (int c = x0; c <= x1; ++c) {
    put(y0, c);
    put(y1, c);
  }
  for (int r = y0; r <= y1; ++r) {
    put(r, x0);
    put(r, x1);
  }
}

std::vector<Sequence> load_all(const std::filesystem::path& dataset_dir) {
  std::vector<Sequence> out;
  for (const auto& dir : list_sequences(dataset_dir)) out.push_back(load_sequence(dir));
  return out;
}

}  // namespace

void ensure_writable_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) throw Error("cannot create directory " + dir.string());
  const auto probe = dir / ".write_probe";
  {
    std::ofstream out(probe);
    if (!out || !(out << "ok")) throw Error("directory is not writable: " + dir.string());
  }
  std::filesystem::remove(probe, ec);
}

TrainResult cmd_train(const RunConfig& config, const std::filesystem::path& run_dir, bool resume,
                      std::ostream* progress) {
  config.validate();
  ensure_writable_dir(run_dir);
  write_config(run_dir / "config.ini", config);
  TrainOptions options;
  options.run_dir = run_dir;
  options.seed = config.general.seed;
  options.resume = resume;
  options.progress = progress;
  return train(make_env_config(config, false), config.ppo, options);
}

std::unique_ptr<Controller> make_controller(const RunConfig& config, const std::filesystem::path& run_dir) {
  switch (config.general.controller) {
    case ControllerKind::Rl: {
      std::filesystem::path ckpt = config.general.checkpoint;
      if (ckpt.empty()) {
        const auto latest = latest_checkpoint(run_dir);
        if (!latest) throw Error("no policy checkpoint found in " + run_dir.string());
        ckpt = latest->second;
      }
      if (!std::filesystem::exists(ckpt)) throw Error("checkpoint not found: " + ckpt.string());
      return std::make_unique<PolicyController>(load_checkpoint<float>(ckpt), config.general.greedy);
    }
    case ControllerKind::Pid:
      return std::make_unique<PidController>(config.ibvs, make_env_config(config, true));
    case ControllerKind::Random:
      return std::make_unique<RandomController>();
    case ControllerKind::Hover:
      return std::make_unique<HoverController>();
  }
  throw Error("unknown controller");
}

std::filesystem::path trajectory_path(const std::filesystem::path& run_dir, int episode) {
  char name[64];
  std::snprintf(name, sizeof name, "episode_%03d.jsonl", episode);
  return run_dir / "trajectories" / name;
}

EvalOutput cmd_eval(const RunConfig& config, const std::filesystem::path& run_dir) {
  config.validate();
  auto controller = make_controller(config, run_dir);
  ensure_writable_dir(run_dir / "trajectories");
  write_config(run_dir / "config.ini", config);

  const EnvConfig env_config = make_env_config(config, true);
  TrackingEnv env(env_config);
  EvalOutput out;
  for (int i = 0; i < config.general.episodes; ++i) {
    std::ofstream log = open_out(trajectory_path(run_dir, i));
    out.records.push_back(run_episode(env, *controller, i,
                                      eval_episode_seed(config.general.seed, static_cast<std::uint64_t>(i)), &log));
  }
  out.summary = summarize(out.records, env_config.episode.desired_distance);
  {
    std::ofstream f = open_out(run_dir / "episodes.csv");
    write_records(f, out.records);
  }
  {
    std::ofstream f = open_out(run_dir / "summary.csv");
    write_summary(f, out.summary);
  }
  return out;
}

void cmd_gen_dataset(const RunConfig& config, const std::vector<DatasetManeuver>& maneuvers,
                     const std::filesystem::path& out_dir) {
  config.dataset.validate();
  ensure_writable_dir(out_dir);
  for (DatasetManeuver m : maneuvers) {
    const Sequence seq = generate_sequence(m, config.dataset, config.camera, config.scene);
    write_sequence(out_dir / seq.name, seq);
  }
}

BenchReport cmd_bench_estimator(const std::filesystem::path& dataset_dir, const RunConfig& config,
                                const std::filesystem::path& report_path, int frame_limit) {
  const std::vector<Sequence> sequences = load_all(dataset_dir);
  BenchConfig bench = make_bench_config(config);
  bench.frame_limit = frame_limit;
  const BenchReport report = run_bench(sequences, bench);
  if (!report_path.empty()) {
    if (report_path.has_parent_path()) ensure_writable_dir(report_path.parent_path());
    std::ofstream f = open_out(report_path);
    write_bench_report(f, report);
  }
  return report;
}

ReplaySummary cmd_replay(const std::filesystem::path& run_dir, int episode, const std::filesystem::path& out_dir) {
  const auto log_path = trajectory_path(run_dir, episode);
  std::ifstream in(log_path);
  if (!in) throw Error("trajectory log not found: " + log_path.string());
  RunConfig config;
  if (std::filesystem::exists(run_dir / "config.ini")) config = load_config(run_dir / "config.ini");
  ensure_writable_dir(out_dir / "frames");

  std::ofstream plot = open_out(out_dir / "plot.csv");
  plot << "step,tick,action,chaser_x,chaser_y,chaser_z,chaser_yaw,target_x,target_y,target_z,distance,"
          "detection_valid,r_a,r_t,r_c,total\n";
  ReplaySummary summary;
  summary.action_histogram.assign(kNumActions + 1, 0);
  Rng noise = make_stream(config.general.seed, "replay");
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error(log_path.string() + " line " + std::to_string(line_no) + ": " + e.what());
    }
    const int step = rec.at("step").get<int>();
    if (step == 0) continue;  // reset record carries no action
    const int action = rec.at("action").get<int>();
    const auto& r = rec.at("reward");
    const auto chaser = rec.at("chaser").get<std::vector<double>>();
    const auto target = rec.at("target").get<std::vector<double>>();
    const auto obs = rec.at("observation").get<std::vector<double>>();
    plot << step << ',' << rec.at("tick").get<std::uint64_t>() << ',' << action << ',' << chaser[0] << ','
         << chaser[1] << ',' << chaser[2] << ',' << rec.at("chaser_yaw").get<double>() << ',' << target[0] << ','
         << target[1] << ',' << target[2] << ',' << obs[4] << ',' << (rec.at("detection_valid").get<bool>() ? 1 : 0)
         << ',' << r.at("alignment").get<double>() << ',' << r.at("distance").get<double>() << ','
         << r.at("continuity").get<double>() << ',' << r.at("total").get<double>() << '\n';
    ++summary.rows;
    ++summary.action_histogram[action >= 0 && action < kNumActions ? action : kNumActions];

    WorldState state;
    state.tick = rec.at("tick").get<std::uint64_t>();
    state.chaser.position = {chaser[0], chaser[1], chaser[2]};
    state.chaser.yaw = rec.at("chaser_yaw").get<double>();
    state.target.position = {target[0], target[1], target[2]};
    RenderResult rendered = render(state, config.camera, config.scene, noise);
    Image px = rendered.frame.pixels();
    if (rendered.truth) draw_box(px, *rendered.truth, 0.0);
    const BoundingBox measured{obs[0], obs[1], obs[2], obs[3]};
    if (!measured.is_sentinel()) draw_box(px, measured, 1.0);
    write_pgm(out_dir / "frames" / frame_filename(state.tick), Frame(std::move(px), state.tick));
  }
  if (summary.rows == 0) throw Error("trajectory log has no steps: " + log_path.string());

  std::ofstream hist = open_out(out_dir / "actions.csv");
  hist << "action,count\n";
  for (int a = 0; a < kNumActions; ++a) hist << a << ',' << summary.action_histogram[a] << '\n';
  hist << "continuous," << summary.action_histogram[kNumActions] << '\n';
  return summary;
}

TuneResult cmd_tune_pid(const RunConfig& config, const std::filesystem::path& run_dir, int episodes,
                        const GainGrid& grid) {
  config.validate();
  ensure_writable_dir(run_dir);
  const TuneResult result =
      tune_gains(make_env_config(config, true), grid.candidates(config.ibvs), episodes, config.general.seed);
  {
    std::ofstream f = open_out(run_dir / "tune.csv");
    f << "k_u,k_v,k_z,k_psi,mean_length,mean_distance_error\n";
    for (const auto& s : result.scores)
      f << s.gains.k_u << ',' << s.gains.k_v << ',' << s.gains.k_z << ',' << s.gains.k_psi << ',' << s.mean_length
        << ',' << s.mean_distance_error << '\n';
  }
  RunConfig tuned = config;
  tuned.ibvs = result.best;
  write_config(run_dir / "config.ini", tuned);
  return result;
}

ApceCalibration cmd_calibrate_apce(const std::filesystem::path& dataset_dir, const RunConfig& config,
                                   double percentile) {
  ApceCalibration out;
  for (const auto& seq : load_all(dataset_dir)) {
    const double v = calibrate_apce(seq.frames, seq.truth, config.kcf, percentile);
    out.per_sequence.emplace_back(seq.name, v);
  }
  out.suggested = std::min_element(out.per_sequence.begin(), out.per_sequence.end(), [](const auto& a, const auto& b) {
                    return a.second < b.second;
                  })->second;
  return out;
}

}  // namespace aerotrack
