#pragma once

#include "aerotrack/env.hpp"
#include "aerotrack/policy.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

namespace aerotrack {

struct PpoConfig {
  double learning_rate = 1e-4;
  int batch_size = 256;
  double gae_lambda = 0.95;
  double gamma = 0.99;
  double clip = 0.2;
  int epochs = 10;
  int horizon = 2048;
  long total_timesteps = 200000;
  double value_coef = 0.5;
  double entropy_coef = 0.01;
  double max_grad_norm = 0.5;  // <= 0 disables clipping
  double reward_scale = 0.1;   // learner sees reward * reward_scale; curves report raw rewards
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  int checkpoint_every = 10;  // updates
  int curve_window = 100;     // most recent episodes averaged per curve row
  NetworkDims network;

  void validate() const;
};

struct RolloutBuffer {
  std::vector<std::array<float, kObservationSize>> observations;
  std::vector<int> actions;
  std::vector<double> log_probs;
  std::vector<double> values;
  std::vector<double> rewards;
  std::vector<int> dones;  // 1 when the episode ended after this step

  std::size_t size() const { return actions.size(); }
  void clear();
  void add(const std::array<float, kObservationSize>& obs, int action, double log_prob, double value, double reward,
           bool done);
};

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;
};

/// Backward GAE recursion; `last_value` bootstraps the state after the final record.
GaeResult compute_gae(const RolloutBuffer& buffer, double last_value, double gamma, double lambda);

class Adam {
 public:
  Adam(std::size_t size, double learning_rate, double beta1 = 0.9, double beta2 = 0.999, double epsilon = 1e-8);
  void step(Eigen::VectorXf& params, const Eigen::VectorXf& gradient);
  long steps() const { return t_; }

 private:
  Eigen::VectorXd m_, v_;
  double lr_, beta1_, beta2_, epsilon_;
  long t_ = 0;
};

struct UpdateStats {
  LossTerms mean;  // averaged over minibatches
  double grad_norm = 0.0;
  int minibatches = 0;
  bool aborted = false;  // non-finite loss or gradient; parameters were left untouched
};

/// Epochs of shuffled minibatch PPO on one rollout. Advantages are normalized per minibatch.
UpdateStats ppo_update(ActorCritic<float>& net, Adam& optimizer, const RolloutBuffer& buffer, const GaeResult& gae,
                       const PpoConfig& config, Rng& rng);

struct CurvePoint {
  long timestep = 0;
  double mean_reward = 0.0;
  double mean_length = 0.0;
};

struct TrainOptions {
  std::filesystem::path run_dir;
  std::uint64_t seed = 0;
  bool resume = false;
  std::ostream* progress = nullptr;
};

struct TrainResult {
  ActorCritic<float> policy;
  std::vector<CurvePoint> curves;
  long timesteps = 0;
};

/// Seed of the index-th episode drawn from the root seed.
std::uint64_t episode_seed(std::uint64_t root_seed, std::uint64_t index);

std::filesystem::path checkpoint_path(const std::filesystem::path& run_dir, long timestep);
/// Checkpoint with the largest timestep in the directory, if any.
std::optional<std::pair<long, std::filesystem::path>> latest_checkpoint(const std::filesystem::path& run_dir);

std::vector<CurvePoint> read_curves(const std::filesystem::path& path);
void write_curves(const std::filesystem::path& path, const std::vector<CurvePoint>& curves);

/// Rollout/update cycles against a single environment. Writes ckpt_<timestep>.bin every
/// `checkpoint_every` updates and at the end, and rewrites curves.csv after every update.
TrainResult train(const EnvConfig& env_config, const PpoConfig& config, const TrainOptions& options);

/// Policy input for the current observation as a single column.
Eigen::VectorXf policy_input(const ObservationStack& stack, const EnvConfig& env_config);

}  // namespace aerotrack
