#include "aerotrack/ppo.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <regex>
#include <sstream>

namespace aerotrack {

void PpoConfig::validate() const {
  if (!(learning_rate > 0.0)) throw Error("learning_rate must be positive");
  if (batch_size <= 0) throw Error("batch_size must be positive");
  if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0)) throw Error("gae_lambda must be in [0, 1]");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw Error("gamma must be in [0, 1]");
  if (!(clip > 0.0)) throw Error("clip must be positive");
  if (epochs <= 0) throw Error("epochs must be positive");
  if (horizon <= 0) throw Error("horizon must be positive");
  if (total_timesteps <= 0) throw Error("total_timesteps must be positive");
  if (!(value_coef >= 0.0) || !(entropy_coef >= 0.0)) throw Error("loss coefficients must be non-negative");
  if (!(reward_scale > 0.0)) throw Error("reward_scale must be positive");
  if (checkpoint_every <= 0) throw Error("checkpoint_every must be positive");
  if (curve_window <= 0) throw Error("curve_window must be positive");
  if (network.input != kObservationSize || network.actions != kNumActions)
    throw Error("network input/output must match the observation and action spaces");
}

void RolloutBuffer::clear() {
  observations.clear();
  actions.clear();
  log_probs.clear();
  values.clear();
  rewards.clear();
  dones.clear();
}

void RolloutBuffer::add(const std::array<float, kObservationSize>& obs, int action, double log_prob, double value,
                        double reward, bool done) {
  observations.push_back(obs);
  actions.push_back(action);
  log_probs.push_back(log_prob);
  values.push_back(value);
  rewards.push_back(reward);
  dones.push_back(done ? 1 : 0);
}

GaeResult compute_gae(const RolloutBuffer& buffer, double last_value, double gamma, double lambda) {
  const std::size_t n = buffer.size();
  if (buffer.rewards.size() != n || buffer.values.size() != n || buffer.dones.size() != n)
    throw Error("inconsistent rollout buffer");
  GaeResult out;
  out.advantages.assign(n, 0.0);
  out.returns.assign(n, 0.0);
  double next_adv = 0.0;
  for (std::size_t k = n; k-- > 0;) {
    const double not_done = buffer.dones[k] ? 0.0 : 1.0;
    const double next_value = k + 1 < n ? buffer.values[k + 1] : last_value;
    const double delta = buffer.rewards[k] + gamma * not_done * next_value - buffer.values[k];
    next_adv = delta + gamma * lambda * not_done * next_adv;
    out.advantages[k] = next_adv;
    out.returns[k] = next_adv + buffer.values[k];
  }
  return out;
}

Adam::Adam(std::size_t size, double learning_rate, double beta1, double beta2, double epsilon)
    : m_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size))),
      v_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size))),
      lr_(learning_rate),
      beta1_(beta1),
      beta2_(beta2),
      epsilon_(epsilon) {}

void Adam::step(Eigen::VectorXf& params, const Eigen::VectorXf& gradient) {
  if (params.size() != m_.size() || gradient.size() != m_.size()) throw Error("optimizer size mismatch");
  ++t_;
  const Eigen::VectorXd g = gradient.cast<double>();
  m_ = beta1_ * m_ + (1.0 - beta1_) * g;
  v_ = beta2_ * v_ + (1.0 - beta2_) * g.cwiseProduct(g);
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  const Eigen::VectorXd step = lr_ * (m_ / c1).array() / ((v_ / c2).array().sqrt() + epsilon_);
  params -= step.cast<float>();
}

UpdateStats ppo_update(ActorCritic<float>& net, Adam& optimizer, const RolloutBuffer& buffer, const GaeResult& gae,
                       const PpoConfig& config, Rng& rng) {
  const std::size_t n = buffer.size();
  if (n == 0) throw Error("empty rollout");
  if (gae.advantages.size() != n) throw Error("advantages not computed for this rollout");

  const ActorCritic<float> net_backup = net;
  const Adam optimizer_backup = optimizer;
  UpdateStats stats;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  const auto batch = static_cast<std::size_t>(config.batch_size);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t m = std::min(batch, n - start);
      PpoBatch<float> mb;
      mb.observations.resize(kObservationSize, static_cast<Eigen::Index>(m));
      double mean = 0.0, sq = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        const std::size_t k = order[start + j];
        mean += gae.advantages[k];
      }
      mean /= static_cast<double>(m);
      for (std::size_t j = 0; j < m; ++j) {
        const double d = gae.advantages[order[start + j]] - mean;
        sq += d * d;
      }
      const double sd = std::sqrt(sq / static_cast<double>(m));
      for (std::size_t j = 0; j < m; ++j) {
        const std::size_t k = order[start + j];
        const auto& o = buffer.observations[k];
        for (int r = 0; r < kObservationSize; ++r) mb.observations(r, static_cast<Eigen::Index>(j)) = o[r];
        mb.actions.push_back(buffer.actions[k]);
        mb.old_log_probs.push_back(static_cast<float>(buffer.log_probs[k]));
        mb.advantages.push_back(static_cast<float>((gae.advantages[k] - mean) / (sd + 1e-8)));
        mb.returns.push_back(static_cast<float>(gae.returns[k]));
      }

      auto [terms, grad] = ppo_loss<float>(net, mb, static_cast<float>(config.clip),
                                           static_cast<float>(config.value_coef),
                                           static_cast<float>(config.entropy_coef));
      Eigen::VectorXf g = grad.params();
      const double norm = static_cast<double>(g.norm());
      if (!std::isfinite(terms.total) || !std::isfinite(norm)) {
        net = net_backup;
        optimizer = optimizer_backup;
        stats.mean = terms;
        stats.grad_norm = norm;
        stats.aborted = true;
        return stats;
      }
      if (config.max_grad_norm > 0.0 && norm > config.max_grad_norm)
        g *= static_cast<float>(config.max_grad_norm / norm);
      optimizer.step(net.params(), g);

      ++stats.minibatches;
      stats.grad_norm += norm;
      stats.mean.total += terms.total;
      stats.mean.policy += terms.policy;
      stats.mean.value += terms.value;
      stats.mean.entropy += terms.entropy;
      stats.mean.unclipped += terms.unclipped;
      stats.mean.approx_kl += terms.approx_kl;
      stats.mean.clip_fraction += terms.clip_fraction;
    }
  }
  const double k = stats.minibatches;
  stats.grad_norm /= k;
  stats.mean.total /= k;
  stats.mean.policy /= k;
  stats.mean.value /= k;
  stats.mean.entropy /= k;
  stats.mean.unclipped /= k;
  stats.mean.approx_kl /= k;
  stats.mean.clip_fraction /= k;
  return stats;
}

std::uint64_t episode_seed(std::uint64_t root_seed, std::uint64_t index) {
  Rng rng = make_stream(root_seed, "episode", index);
  return rng();
}

std::filesystem::path checkpoint_path(const std::filesystem::path& run_dir, long timestep) {
  return run_dir / ("ckpt_" + std::to_string(timestep) + ".bin");
}

std::optional<std::pair<long, std::filesystem::path>> latest_checkpoint(const std::filesystem::path& run_dir) {
  static const std::regex pattern(R"(ckpt_(\d+)\.bin)");
  std::optional<std::pair<long, std::filesystem::path>> best;
  if (!std::filesystem::is_directory(run_dir)) return best;
  for (const auto& entry : std::filesystem::directory_iterator(run_dir)) {
    std::smatch m;
    const std::string name = entry.path().filename().string();
    if (!std::regex_match(name, m, pattern)) continue;
    const long ts = std::stol(m[1].str());
    if (!best || ts > best->first) best = {ts, entry.path()};
  }
  return best;
}

std::vector<CurvePoint> read_curves(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open curves file: " + path.string());
  std::vector<CurvePoint> out;
  std::string line;
  std::getline(in, line);  // header
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    CurvePoint p;
    char c1 = 0, c2 = 0;
    if (!(ss >> p.timestep >> c1 >> p.mean_reward >> c2 >> p.mean_length) || c1 != ',' || c2 != ',')
      throw Error("malformed curves row at line " + std::to_string(line_no));
    out.push_back(p);
  }
  return out;
}

void write_curves(const std::filesystem::path& path, const std::vector<CurvePoint>& curves) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write curves file: " + path.string());
  out.precision(17);
  out << "timestep,mean_reward,mean_length\n";
  for (const auto& p : curves) out << p.timestep << ',' << p.mean_reward << ',' << p.mean_length << '\n';
}

Eigen::VectorXf policy_input(const ObservationStack& stack, const EnvConfig& env_config) {
  const auto enc = encode_observation(stack, env_config.camera, env_config.dynamics.action_scale);
  return Eigen::Map<const Eigen::VectorXf>(enc.data(), kObservationSize);
}

TrainResult train(const EnvConfig& env_config, const PpoConfig& config, const TrainOptions& options) {
  config.validate();
  std::filesystem::create_directories(options.run_dir);
  const auto curves_path = options.run_dir / "curves.csv";

  TrainResult result;
  long timestep = 0;
  if (options.resume) {
    const auto latest = latest_checkpoint(options.run_dir);
    if (!latest) throw Error("no checkpoint to resume from in " + options.run_dir.string());
    result.policy = load_checkpoint<float>(latest->second);
    if (result.policy.dims() != config.network) throw Error("checkpoint architecture does not match config");
    timestep = latest->first;
    if (std::filesystem::exists(curves_path))
      for (const auto& p : read_curves(curves_path))
        if (p.timestep <= timestep) result.curves.push_back(p);
  } else {
    Rng init_rng = make_stream(options.seed, "policy-init");
    result.policy = ActorCritic<float>::initialized(config.network, init_rng);
  }
  const long start_timestep = timestep;

  Rng policy_rng = make_stream(options.seed, "policy", static_cast<std::uint64_t>(start_timestep));
  Rng update_rng = make_stream(options.seed, "policy-update", static_cast<std::uint64_t>(start_timestep));
  Adam optimizer(config.network.parameter_count(), config.learning_rate, config.adam_beta1, config.adam_beta2,
                 config.adam_epsilon);

  TrackingEnv env(env_config);
  auto episode_index = static_cast<std::uint64_t>(start_timestep);
  StepResult current = env.reset(episode_seed(options.seed, episode_index++));
  double episode_reward = 0.0;
  std::vector<std::pair<double, int>> finished;  // (return, length)

  RolloutBuffer buffer;
  int update = 0;
  while (timestep < config.total_timesteps) {
    buffer.clear();
    const long steps = std::min<long>(config.horizon, config.total_timesteps - timestep);
    for (long s = 0; s < steps; ++s) {
      const Eigen::VectorXf x = policy_input(current.observation, env_config);
      const auto act = result.policy.forward(x);
      const Eigen::VectorXf logits = act.logits.col(0);
      const SampledAction a = sample_action<float>(logits, policy_rng);
      const auto obs = encode_observation(current.observation, env_config.camera, env_config.dynamics.action_scale);

      StepResult next = env.step(a.index);
      episode_reward += next.reward.total;
      double reward = config.reward_scale * next.reward.total;
      if (next.reason == Termination::MaxSteps) {
        // Time-limit truncation: bootstrap from the value of the state that was cut off.
        const auto tail = result.policy.forward(policy_input(next.observation, env_config));
        reward += config.gamma * static_cast<double>(tail.values(0));
      }
      buffer.add(obs, a.index, a.log_prob, static_cast<double>(act.values(0)), reward, next.terminated);
      ++timestep;

      if (next.terminated) {
        finished.emplace_back(episode_reward, env.steps());
        episode_reward = 0.0;
        current = env.reset(episode_seed(options.seed, episode_index++));
      } else {
        current = std::move(next);
      }
    }

    const auto tail = result.policy.forward(policy_input(current.observation, env_config));
    const GaeResult gae = compute_gae(buffer, static_cast<double>(tail.values(0)), config.gamma, config.gae_lambda);
    const UpdateStats stats = ppo_update(result.policy, optimizer, buffer, gae, config, update_rng);
    if (stats.aborted) {
      std::ostringstream msg;
      msg << "non-finite PPO loss at timestep " << timestep << " (policy " << stats.mean.policy << ", value "
          << stats.mean.value << ", entropy " << stats.mean.entropy << ", grad norm " << stats.grad_norm << ")";
      throw Error(msg.str());
    }
    ++update;

    CurvePoint point;
    point.timestep = timestep;
    if (finished.empty()) {
      point.mean_reward = episode_reward;
      point.mean_length = env.steps();
    } else {
      const std::size_t window = std::min<std::size_t>(finished.size(), static_cast<std::size_t>(config.curve_window));
      for (std::size_t i = finished.size() - window; i < finished.size(); ++i) {
        point.mean_reward += finished[i].first;
        point.mean_length += finished[i].second;
      }
      point.mean_reward /= static_cast<double>(window);
      point.mean_length /= static_cast<double>(window);
    }
    result.curves.push_back(point);
    write_curves(curves_path, result.curves);

    const bool last = timestep >= config.total_timesteps;
    if (last || update % config.checkpoint_every == 0) save_checkpoint(checkpoint_path(options.run_dir, timestep), result.policy);

    if (options.progress)
      *options.progress << "update " << update << " timestep " << timestep << " mean_reward " << point.mean_reward
                        << " mean_length " << point.mean_length << " entropy " << stats.mean.entropy << " kl "
                        << stats.mean.approx_kl << '\n';
  }
  result.timesteps = timestep;
  return result;
}

}  // namespace aerotrack
