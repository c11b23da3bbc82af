#include "aerotrack/episodes.hpp"

#include "aerotrack/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace aerotrack {

std::string to_string(ControllerKind kind) {
  switch (kind) {
    case ControllerKind::Rl: return "rl";
    case ControllerKind::Pid: return "pid";
    case ControllerKind::Random: return "random";
    case ControllerKind::Hover: return "hover";
  }
  return "unknown";
}

ControllerKind parse_controller(const std::string& text) {
  if (text == "rl") return ControllerKind::Rl;
  if (text == "pid") return ControllerKind::Pid;
  if (text == "random") return ControllerKind::Random;
  if (text == "hover") return ControllerKind::Hover;
  throw Error("unknown controller: " + text);
}

PolicyController::PolicyController(ActorCritic<float> policy, bool greedy)
    : policy_(std::move(policy)), greedy_(greedy) {}

void PolicyController::reset(std::uint64_t episode_seed) { rng_ = make_stream(episode_seed, "policy"); }

StepResult PolicyController::act(TrackingEnv& env, const StepResult& last) {
  const auto out = policy_.forward(policy_input(last.observation, env.config()));
  const Eigen::VectorXf logits = out.logits.col(0);
  const int action = greedy_ ? greedy_action<float>(logits) : sample_action<float>(logits, rng_).index;
  return env.step(action);
}

void RandomController::reset(std::uint64_t episode_seed) { rng_ = make_stream(episode_seed, "policy"); }

StepResult RandomController::act(TrackingEnv& env, const StepResult&) {
  std::uniform_int_distribution<int> pick(0, kNumActions - 1);
  return env.step(pick(rng_));
}

StepResult HoverController::act(TrackingEnv& env, const StepResult&) { return env.step(kNumActions - 1); }

PidController::PidController(IbvsGains gains, const EnvConfig& env_config)
    : controller_(gains, env_config.camera, env_config.episode.desired_distance) {}

void PidController::reset(std::uint64_t) { controller_.reset(); }

StepResult PidController::act(TrackingEnv& env, const StepResult& last) {
  const IbvsCommand cmd = controller_.command(last.target_center, last.observation.latest().distance);
  return env.step(to_velocity(cmd));
}

std::uint64_t eval_episode_seed(std::uint64_t root_seed, std::uint64_t index) {
  Rng rng = make_stream(root_seed, "eval-episode", index);
  return rng();
}

EpisodeRecord run_episode(TrackingEnv& env, Controller& controller, int index, std::uint64_t seed,
                          std::ostream* log) {
  env.set_trajectory_log(log);
  controller.reset(seed);
  StepResult last = env.reset(seed);
  EpisodeRecord record;
  record.episode = index;
  record.seed = seed;
  record.maneuver = env.maneuver();
  double distance_sum = 0.0;
  while (!last.terminated) {
    last = controller.act(env, last);
    distance_sum += last.observation.latest().distance;
  }
  env.set_trajectory_log(nullptr);
  record.length = env.steps();
  record.average_distance = distance_sum / record.length;
  record.reason = last.reason;
  return record;
}

std::vector<EpisodeRecord> evaluate(const EnvConfig& env_config, Controller& controller, int episodes,
                                    std::uint64_t root_seed) {
  if (episodes <= 0) throw Error("episodes must be positive");
  TrackingEnv env(env_config);
  std::vector<EpisodeRecord> out;
  out.reserve(static_cast<std::size_t>(episodes));
  for (int i = 0; i < episodes; ++i)
    out.push_back(run_episode(env, controller, i, eval_episode_seed(root_seed, static_cast<std::uint64_t>(i))));
  return out;
}

Quartiles quartiles(std::vector<double> values) {
  if (values.empty()) throw Error("no values to summarize");
  std::sort(values.begin(), values.end());
  auto at = [&values](double q) {
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
  };
  return {at(0.25), at(0.5), at(0.75)};
}

EvalSummary summarize(const std::vector<EpisodeRecord>& records, double d_star) {
  std::vector<double> len, dist, err;
  for (const auto& r : records) {
    len.push_back(r.length);
    dist.push_back(r.average_distance);
    err.push_back(std::abs(r.average_distance - d_star));
  }
  return {quartiles(len), quartiles(dist), quartiles(err), static_cast<int>(records.size())};
}

void write_records(std::ostream& out, const std::vector<EpisodeRecord>& records) {
  out << "episode,seed,length,average_distance,reason,plane,amplitude,frequency\n";
  const auto old = out.precision(10);
  for (const auto& r : records)
    out << r.episode << ',' << r.seed << ',' << r.length << ',' << r.average_distance << ',' << to_string(r.reason)
        << ',' << to_string(r.maneuver.plane) << ',' << r.maneuver.amplitude << ',' << r.maneuver.frequency << '\n';
  out.precision(old);
}

void write_summary(std::ostream& out, const EvalSummary& s) {
  out << "metric,q1,median,q3,iqr\n";
  auto row = [&out](const char* name, const Quartiles& q) {
    out << name << ',' << q.q1 << ',' << q.median << ',' << q.q3 << ',' << q.iqr() << '\n';
  };
  row("length", s.length);
  row("average_distance", s.average_distance);
  row("distance_error", s.distance_error);
}

}  // namespace aerotrack
