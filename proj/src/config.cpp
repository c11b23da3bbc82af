#include "aerotrack/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <fstream>
#include <ostream>
#include <set>

namespace aerotrack {
namespace {

std::string format(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

template <typename T>
T parse_number(const std::string& text) {
  T value{};
  const char* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, value);
  if (res.ec != std::errc{} || res.ptr != end) throw Error("invalid number '" + text + "'");
  return value;
}

bool parse_bool(const std::string& text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw Error("invalid boolean '" + text + "'");
}

template <typename T>
ConfigKey number(std::string section, std::string key, T& field) {
  ConfigKey k{std::move(section), std::move(key), nullptr, nullptr};
  if constexpr (std::is_floating_point_v<T>)
    k.get = [&field] { return format(field); };
  else
    k.get = [&field] { return std::to_string(field); };
  k.set = [&field](const std::string& s) { field = parse_number<T>(s); };
  return k;
}

ConfigKey flag(std::string section, std::string key, bool& field) {
  return {std::move(section), std::move(key), [&field] { return std::string(field ? "true" : "false"); },
          [&field](const std::string& s) { field = parse_bool(s); }};
}

Perception parse_perception(const std::string& s) {
  if (s == "oracle") return Perception::OracleDirect;
  if (s == "fused") return Perception::Fused;
  throw Error("unknown perception '" + s + "' (oracle or fused)");
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

void RunConfig::validate() const {
  camera.validate();
  detector.validate();
  kcf.validate();
  estimator.validate();
  dynamics.validate();
  maneuvers.validate();
  episode.validate();
  if (eval_max_steps <= 0) throw Error("eval_max_steps must be positive");
  ppo.validate();
  ibvs.validate();
  dataset.validate();
  if (general.episodes <= 0) throw Error("episodes must be positive");
}

std::vector<ConfigKey> config_keys(RunConfig& c) {
  std::vector<ConfigKey> keys;
  keys.push_back(number("general", "seed", c.general.seed));
  keys.push_back({"general", "controller", [&c] { return to_string(c.general.controller); },
                  [&c](const std::string& s) { c.general.controller = parse_controller(s); }});
  keys.push_back({"general", "perception",
                  [&c] { return std::string(c.general.perception == Perception::Fused ? "fused" : "oracle"); },
                  [&c](const std::string& s) { c.general.perception = parse_perception(s); }});
  keys.push_back({"general", "checkpoint", [&c] { return c.general.checkpoint; },
                  [&c](const std::string& s) { c.general.checkpoint = s; }});
  keys.push_back(number("general", "episodes", c.general.episodes));
  keys.push_back(flag("general", "greedy", c.general.greedy));

  keys.push_back(number("camera", "width", c.camera.width));
  keys.push_back(number("camera", "height", c.camera.height));
  keys.push_back(number("camera", "focal_px", c.camera.focal_px));

  keys.push_back(number("detector", "miss_prob", c.detector.miss_prob));
  keys.push_back(number("detector", "center_noise_sigma", c.detector.center_noise_sigma));
  keys.push_back(number("detector", "size_noise_sigma", c.detector.size_noise_sigma));
  keys.push_back(number("detector", "confidence_mean", c.detector.confidence_mean));
  keys.push_back(number("detector", "confidence_sigma", c.detector.confidence_sigma));
  keys.push_back(number("detector", "false_positive_prob", c.detector.false_positive_prob));
  keys.push_back(number("detector", "latency_ms", c.detector.latency_ms));
  keys.push_back(number("detector", "min_detectable_px", c.detector.min_detectable_px));

  keys.push_back(number("kcf", "padding", c.kcf.padding));
  keys.push_back(number("kcf", "lambda", c.kcf.lambda));
  keys.push_back(number("kcf", "kernel_sigma", c.kcf.kernel_sigma));
  keys.push_back(number("kcf", "label_sigma_factor", c.kcf.label_sigma_factor));
  keys.push_back(number("kcf", "learn_rate", c.kcf.learn_rate));

  keys.push_back(number("estimator", "physics_px", c.estimator.physics_px));
  keys.push_back(number("estimator", "apce", c.estimator.apce));
  keys.push_back(number("estimator", "confidence", c.estimator.confidence));
  keys.push_back(number("estimator", "max_extrapolation", c.estimator.max_extrapolation));
  keys.push_back(number("estimator", "min_train_box", c.estimator.min_train_box));

  keys.push_back(number("world", "dt", c.dynamics.dt));
  keys.push_back(number("world", "tau", c.dynamics.tau));
  keys.push_back(number("world", "wind_sigma", c.dynamics.wind_sigma));
  keys.push_back(number("world", "action_scale", c.dynamics.action_scale));
  keys.push_back(number("world", "amplitude_mean", c.maneuvers.amplitude_mean));
  keys.push_back(number("world", "amplitude_sigma", c.maneuvers.amplitude_sigma));
  keys.push_back(number("world", "frequency_mean", c.maneuvers.frequency_mean));
  keys.push_back(number("world", "frequency_sigma", c.maneuvers.frequency_sigma));
  keys.push_back(number("world", "forward_speed", c.maneuvers.forward_speed));
  keys.push_back(number("world", "altitude", c.altitude));

  keys.push_back(number("episode", "max_steps", c.episode.max_steps));
  keys.push_back(number("episode", "eval_max_steps", c.eval_max_steps));
  keys.push_back(number("episode", "max_no_detection", c.episode.max_no_detection));
  keys.push_back(number("episode", "desired_distance", c.episode.desired_distance));
  keys.push_back(number("episode", "alpha1", c.episode.alpha1));
  keys.push_back(number("episode", "alpha2", c.episode.alpha2));

  keys.push_back(number("ppo", "learning_rate", c.ppo.learning_rate));
  keys.push_back(number("ppo", "reward_scale", c.ppo.reward_scale));
  keys.push_back(number("ppo", "batch_size", c.ppo.batch_size));
  keys.push_back(number("ppo", "gae_lambda", c.ppo.gae_lambda));
  keys.push_back(number("ppo", "gamma", c.ppo.gamma));
  keys.push_back(number("ppo", "clip", c.ppo.clip));
  keys.push_back(number("ppo", "epochs", c.ppo.epochs));
  keys.push_back(number("ppo", "horizon", c.ppo.horizon));
  keys.push_back(number("ppo", "total_timesteps", c.ppo.total_timesteps));
  keys.push_back(number("ppo", "value_coef", c.ppo.value_coef));
  keys.push_back(number("ppo", "entropy_coef", c.ppo.entropy_coef));
  keys.push_back(number("ppo", "max_grad_norm", c.ppo.max_grad_norm));
  keys.push_back(number("ppo", "checkpoint_every", c.ppo.checkpoint_every));
  keys.push_back(number("ppo", "curve_window", c.ppo.curve_window));
  keys.push_back(number("ppo", "hidden1", c.ppo.network.hidden1));
  keys.push_back(number("ppo", "hidden2", c.ppo.network.hidden2));

  keys.push_back(number("ibvs", "k_u", c.ibvs.k_u));
  keys.push_back(number("ibvs", "k_v", c.ibvs.k_v));
  keys.push_back(number("ibvs", "k_z", c.ibvs.k_z));
  keys.push_back(number("ibvs", "k_psi", c.ibvs.k_psi));
  keys.push_back({"ibvs", "mapping", [&c] { return to_string(c.ibvs.mapping); },
                  [&c](const std::string& s) { c.ibvs.mapping = parse_axis_mapping(s); }});
  keys.push_back(number("ibvs", "max_speed", c.ibvs.max_speed));
  keys.push_back(number("ibvs", "max_yaw_rate", c.ibvs.max_yaw_rate));
  keys.push_back(number("ibvs", "hold_steps", c.ibvs.hold_steps));

  keys.push_back(number("dataset", "frames", c.dataset.frames));
  keys.push_back(number("dataset", "depth", c.dataset.depth));
  keys.push_back(number("dataset", "seed", c.dataset.seed));

  keys.push_back(number("scene", "seed", c.scene.seed));
  keys.push_back(flag("scene", "plain", c.scene.plain));
  keys.push_back(number("scene", "target_size", c.scene.target_size));
  keys.push_back(number("scene", "target_aspect", c.scene.target_aspect));
  keys.push_back(number("scene", "backdrop_radius", c.scene.backdrop_radius));
  keys.push_back(number("scene", "ridge_base", c.scene.ridge_base));
  keys.push_back(number("scene", "ridge_amplitude", c.scene.ridge_amplitude));
  keys.push_back(number("scene", "sensor_noise", c.scene.sensor_noise));
  return keys;
}

void apply_preset(RunConfig& config, const std::string& name) {
  ManeuverDistribution& m = config.maneuvers;
  m.frequency_mean = 0.1;
  m.frequency_sigma = 0.05;
  m.amplitude_sigma = 1.0;
  if (name == "cs1")
    m.amplitude_mean = 5.0;
  else if (name == "cs2-low")
    m.amplitude_mean = 1.0;
  else if (name == "cs2-high")
    m.amplitude_mean = 10.0;
  else
    throw Error("unknown preset '" + name + "' (cs1, cs2-low, cs2-high)");
}

namespace {

void set_key(RunConfig& config, const std::string& section, const std::string& key, const std::string& value) {
  for (auto& k : config_keys(config)) {
    if (k.section != section || k.key != key) continue;
    try {
      k.set(trim(value));
    } catch (const Error& e) {
      throw Error("config key " + section + "." + key + ": " + e.what());
    }
    return;
  }
  throw Error("unknown config key " + section + "." + key);
}

}  // namespace

RunConfig load_config(const std::filesystem::path& path, RunConfig base) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(path.string(), tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw Error("cannot read config " + path.string() + ": " + e.message());
  }
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw Error("config entry outside a section: " + section);
    for (const auto& [key, value] : body) set_key(base, section, key, value.data());
  }
  return base;
}

void apply_override(RunConfig& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  const auto dot = assignment.find('.');
  if (eq == std::string::npos || dot == std::string::npos || dot > eq)
    throw Error("override must look like section.key=value: " + assignment);
  set_key(config, trim(assignment.substr(0, dot)), trim(assignment.substr(dot + 1, eq - dot - 1)),
          assignment.substr(eq + 1));
}

void write_config(std::ostream& out, const RunConfig& config) {
  RunConfig copy = config;
  std::string section;
  for (const auto& k : config_keys(copy)) {
    if (k.section != section) {
      if (!section.empty()) out << '\n';
      section = k.section;
      out << '[' << section << "]\n";
    }
    out << k.key << " = " << k.get() << '\n';
  }
}

void write_config(const std::filesystem::path& path, const RunConfig& config) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write config " + path.string());
  write_config(out, config);
}

EnvConfig make_env_config(const RunConfig& config, bool evaluation) {
  EnvConfig env;
  env.camera = config.camera;
  env.detector = config.detector;
  env.fusion = config.estimator;
  env.kcf = config.kcf;
  env.maneuvers = config.maneuvers;
  env.dynamics = config.dynamics;
  env.spawn.altitude = config.altitude;
  env.spawn.desired_distance = config.episode.desired_distance;
  env.episode = config.episode;
  if (evaluation) env.episode.max_steps = config.eval_max_steps;
  env.scene = config.scene;
  env.perception = config.general.perception;
  return env;
}

BenchConfig make_bench_config(const RunConfig& config) {
  BenchConfig bench;
  bench.detector = config.detector;
  bench.thresholds = config.estimator;
  bench.kcf = config.kcf;
  bench.seed = config.general.seed;
  return bench;
}

}  // namespace aerotrack
