#pragma once

#include "aerotrack/env.hpp"
#include "aerotrack/ibvs.hpp"
#include "aerotrack/policy.hpp"

#include <iosfwd>
#include <memory>
#include <vector>

namespace aerotrack {

enum class ControllerKind { Rl, Pid, Random, Hover };
std::string to_string(ControllerKind kind);
ControllerKind parse_controller(const std::string& text);

/// Drives one environment step from the latest step result.
class Controller {
 public:
  virtual ~Controller() = default;
  virtual void reset(std::uint64_t episode_seed) = 0;
  virtual StepResult act(TrackingEnv& env, const StepResult& last) = 0;
};

class PolicyController final : public Controller {
 public:
  explicit PolicyController(ActorCritic<float> policy, bool greedy = true);
  void reset(std::uint64_t episode_seed) override;
  StepResult act(TrackingEnv& env, const StepResult& last) override;

 private:
  ActorCritic<float> policy_;
  bool greedy_;
  Rng rng_;
};

class RandomController final : public Controller {
 public:
  void reset(std::uint64_t episode_seed) override;
  StepResult act(TrackingEnv& env, const StepResult& last) override;

 private:
  Rng rng_;
};

class HoverController final : public Controller {
 public:
  void reset(std::uint64_t) override {}
  StepResult act(TrackingEnv& env, const StepResult& last) override;
};

/// IBVS baseline fed with the measured box center and the observed distance.
class PidController final : public Controller {
 public:
  PidController(IbvsGains gains, const EnvConfig& env_config);
  void reset(std::uint64_t episode_seed) override;
  StepResult act(TrackingEnv& env, const StepResult& last) override;

 private:
  IbvsController controller_;
};

struct EpisodeRecord {
  int episode = 0;
  std::uint64_t seed = 0;
  int length = 0;                 // steps taken
  double average_distance = 0.0;  // mean true chaser-target distance over the steps, m
  Termination reason = Termination::None;
  ManeuverSpec maneuver;
};

/// Seed of the index-th evaluation episode; disjoint from the training stream.
std::uint64_t eval_episode_seed(std::uint64_t root_seed, std::uint64_t index);

/// Runs until termination. When `log` is set the environment writes its per-step records there.
EpisodeRecord run_episode(TrackingEnv& env, Controller& controller, int index, std::uint64_t seed,
                          std::ostream* log = nullptr);

std::vector<EpisodeRecord> evaluate(const EnvConfig& env_config, Controller& controller, int episodes,
                                    std::uint64_t root_seed);

struct Quartiles {
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double iqr() const { return q3 - q1; }
};

/// Linear-interpolation quartiles. Throws on empty input.
Quartiles quartiles(std::vector<double> values);

struct EvalSummary {
  Quartiles length;
  Quartiles average_distance;
  Quartiles distance_error;  // |average distance - d*|
  int episodes = 0;
};

EvalSummary summarize(const std::vector<EpisodeRecord>& records, double d_star);

void write_records(std::ostream& out, const std::vector<EpisodeRecord>& records);
void write_summary(std::ostream& out, const EvalSummary& summary);

}  // namespace aerotrack
