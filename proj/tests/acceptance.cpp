#include "aerotrack/commands.hpp"
#include "scenarios.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>

using namespace aerotrack;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

const std::filesystem::path& work_dir() {
  static const std::filesystem::path dir = [] {
    auto d = std::filesystem::temp_directory_path() / "aerotrack_acceptance";
    std::filesystem::remove_all(d);
    std::filesystem::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Average ranks, so tied values share a rank.
std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = (static_cast<double>(i + j) / 2.0) + 1.0;
    i = j + 1;
  }
  return r;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  const auto rx = ranks(x), ry = ranks(y);
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += rx[i] / n;
    my += ry[i] / n;
  }
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return sxx > 0 && syy > 0 ? sxy / std::sqrt(sxx * syy) : 0.0;
}

Outcome apce_exactness() {
  double worst = 0.0;
  for (int w : {4, 8, 16, 32})
    for (int h : {4, 8, 16, 32}) {
      Image r = Image::Zero(h, w);
      r(h / 3, w / 2) = 1.0;
      worst = std::max(worst, std::abs(apce(r) - w * h));
      worst = std::max(worst, std::abs(apce(Image::Constant(h, w, 0.37))));
    }
  return {worst <= 1e-9, fmt("worst deviation %.3g over 16 delta and 16 constant maps", worst)};
}

Outcome kcf_oracle() {
  Rng rng = make_stream(2, "acceptance-kernel");
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    Image x(8, 8), z(8, 8);
    for (Eigen::Index k = 0; k < 64; ++k) {
      x.data()[k] = uniform01(rng) - 0.5;
      z.data()[k] = uniform01(rng) - 0.5;
    }
    const double sigma = 0.2 + uniform01(rng);
    const Image fast =
        kcf_detail::gaussian_correlation(fft2(x), x.square().sum(), fft2(z), z.square().sum(), sigma);
    worst = std::max(worst, (fast - fixtures::brute_force_correlation(x, z, sigma)).abs().maxCoeff());
  }
  return {worst <= 1e-6, fmt("max |fft - brute force| %.3g over 100 cases", worst)};
}

Outcome kcf_tracking() {
  const auto seq = fixtures::translation_sequence(200, 5.0, 1);
  double max_step = 0.0;
  for (std::size_t i = 1; i < seq.centers.size(); ++i)
    max_step = std::max(max_step, std::hypot(seq.centers[i].u - seq.centers[i - 1].u,
                                             seq.centers[i].v - seq.centers[i - 1].v));
  const double err = fixtures::kcf_mean_center_error(seq);
  return {err <= 3.0 && max_step <= 5.0, fmt("mean center error %.3f px, largest step %.2f px", err, max_step)};
}

const std::filesystem::path& standard_dataset() {
  static const std::filesystem::path dir = [] {
    const auto d = work_dir() / "dataset";
    cmd_gen_dataset(RunConfig{}, all_dataset_maneuvers(), d);
    return d;
  }();
  return dir;
}

Outcome fusion_robustness() {
  RunConfig c;
  c.detector.latency_ms = 0.0;
  const BenchReport r = cmd_bench_estimator(standard_dataset(), c, work_dir() / "bench_c4.csv");
  const AlgorithmSummary& fused = r.get(BenchAlgorithm::Fused);
  const AlgorithmSummary& kcf = r.get(BenchAlgorithm::KcfOnly);
  const double ratio = fused.rmse.mean / kcf.rmse.mean;
  return {ratio <= 0.2 && fused.in_view_detector_fraction < 0.15,
          fmt("RMSE fused %.2f px vs KCF-only %.2f px (ratio %.3f); in-view detector fraction %.3f", fused.rmse.mean,
              kcf.rmse.mean, ratio, fused.in_view_detector_fraction)};
}

Outcome throughput() {
  RunConfig c;
  c.detector.latency_ms = 150.0;
  const BenchReport r = cmd_bench_estimator(standard_dataset(), c, work_dir() / "bench_c5.csv", 150);
  const double det = r.get(BenchAlgorithm::DetectorEveryFrame).fps.mean;
  const double fused = r.get(BenchAlgorithm::Fused).fps.mean;
  return {det >= 5.0 && det <= 7.0 && fused >= 2.5 * det,
          fmt("detector %.2f FPS, fused %.2f FPS (%.2fx), 150 frames per sequence", det, fused, fused / det)};
}

Outcome reward_spots() {
  const CameraModel cam;
  const double e = std::numbers::e;
  double worst = 0.0;
  worst = std::max(worst, std::abs(reward_alignment(PixelPoint{cam.cx(), cam.cy()}, cam, 5.0) - 1.0));
  worst = std::max(worst, std::abs(reward_distance(8.0, 8.0, 0.5) - 1.0));
  worst = std::max(worst, std::abs(reward_continuity(0, 500) - 1.0 / e));
  worst = std::max(worst, std::abs(reward_continuity(250, 500) - 1.0));
  worst = std::max(worst, std::abs(reward_continuity(500, 500) - e));
  return {worst <= 1e-9, fmt("worst deviation %.3g", worst)};
}

Outcome action_table() {
  const ActionCommand expected[kNumActions] = {
      {1, 0, 0, 0},   {-1, 0, 0, 0},  {0, 0, 0, 30},   {0, 0, 0, -30}, {1, 0, 0, 30},
      {1, 0, 0, -30}, {-1, 0, 0, 30}, {-1, 0, 0, -30}, {0, 1, -1, 0},  {0, -1, -1, 0},
      {0, 1, 1, 0},   {0, -1, 1, 0},  {0, 0, 0, 0},
  };
  int matched = 0;
  for (int i = 0; i < kNumActions; ++i) matched += decode_action(i) == expected[i] ? 1 : 0;
  return {matched == kNumActions, fmt("%.0f of 13 rows exact", matched)};
}

Outcome termination_logic() {
  RunConfig steady;
  steady.detector.miss_prob = 0.0;
  steady.detector.false_positive_prob = 0.0;
  steady.detector.center_noise_sigma = 0.0;
  steady.detector.size_noise_sigma = 0.0;
  steady.detector.confidence_sigma = 0.0;
  steady.maneuvers.amplitude_mean = 0.0;
  steady.maneuvers.amplitude_sigma = 0.0;
  steady.maneuvers.forward_speed = 0.0;
  steady.dynamics.wind_sigma = 0.0;
  bool ok = true;
  int caps[2] = {0, 0};
  for (int evaluation = 0; evaluation < 2; ++evaluation) {
    TrackingEnv env(make_env_config(steady, evaluation == 1));
    env.reset(5);
    StepResult r;
    do r = env.step(12);
    while (!r.terminated);
    caps[evaluation] = env.steps();
    ok = ok && r.reason == Termination::MaxSteps;
  }
  ok = ok && caps[0] == 500 && caps[1] == 1000;

  RunConfig blind;
  blind.detector.miss_prob = 1.0;
  blind.detector.false_positive_prob = 0.0;
  TrackingEnv env(make_env_config(blind, false));
  env.reset(6);
  StepResult r;
  do r = env.step(0);
  while (!r.terminated);
  const int blind_misses = env.consecutive_misses();
  ok = ok && r.reason == Termination::NoDetection && blind_misses == 25;

  // Flaky detector: termination must coincide with the 25th consecutive miss or the step cap.
  RunConfig flaky;
  flaky.detector.miss_prob = 0.85;
  TrackingEnv fenv(make_env_config(flaky, false));
  int checked = 0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    fenv.reset(seed);
    do {
      r = fenv.step(12);
      const bool expect = fenv.consecutive_misses() >= 25 || fenv.steps() >= 500;
      ok = ok && r.terminated == expect && fenv.consecutive_misses() <= 25;
      ++checked;
    } while (!r.terminated);
  }
  return {ok, fmt("caps %.0f/%.0f steps, blind run ends at %.0f misses, %.0f flaky steps checked", caps[0], caps[1],
                  blind_misses, checked)};
}

PpoBatch<double> random_batch(const ActorCritic<double>& net, int n, Rng& rng) {
  PpoBatch<double> b;
  b.observations.resize(net.dims().input, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < net.dims().input; ++i) b.observations(i, j) = normal(rng, 0, 1);
  const auto act = net.forward(b.observations);
  for (int j = 0; j < n; ++j) {
    const int a = static_cast<int>(uniform01(rng) * net.dims().actions);
    const Eigen::VectorXd logits = act.logits.col(j);
    b.actions.push_back(a);
    b.old_log_probs.push_back(log_softmax<double>(logits)(a) + normal(rng, 0, 0.3));
    b.advantages.push_back(normal(rng, 0, 1));
    b.returns.push_back(normal(rng, 0, 2));
  }
  return b;
}

bool near_clip_kink(const ActorCritic<double>& net, const PpoBatch<double>& b, double clip) {
  const auto act = net.forward(b.observations);
  for (std::size_t j = 0; j < b.size(); ++j) {
    const Eigen::VectorXd logits = act.logits.col(static_cast<Eigen::Index>(j));
    const double r = std::exp(log_softmax<double>(logits)(b.actions[j]) - b.old_log_probs[j]);
    if (std::abs(r - (1 - clip)) < 1e-3 || std::abs(r - (1 + clip)) < 1e-3) return true;
  }
  return false;
}

Outcome ppo_numerics() {
  Rng rng = make_stream(9, "acceptance-gradcheck");
  const NetworkDims dims{45, 4, 4, 13};
  const double h = 1e-5, clip = 0.2, cv = 0.5, ce = 0.01;
  double worst_grad = 0.0;
  for (int point = 0; point < 10; ++point) {
    ActorCritic<double> net(dims);
    for (Eigen::Index i = 0; i < net.params().size(); ++i) net.params()(i) = normal(rng, 0, 0.5);
    PpoBatch<double> batch = random_batch(net, 6, rng);
    while (near_clip_kink(net, batch, clip)) batch = random_batch(net, 6, rng);
    const auto [terms, grad] = ppo_loss<double>(net, batch, clip, cv, ce);
    for (Eigen::Index i = 0; i < net.params().size(); ++i) {
      const double saved = net.params()(i);
      net.params()(i) = saved + h;
      const double up = ppo_loss<double>(net, batch, clip, cv, ce).first.total;
      net.params()(i) = saved - h;
      const double down = ppo_loss<double>(net, batch, clip, cv, ce).first.total;
      net.params()(i) = saved;
      const double fd = (up - down) / (2 * h);
      const double a = grad.params()(i);
      worst_grad = std::max(worst_grad, std::abs(a - fd) / std::max({std::abs(a), std::abs(fd), 1e-6}));
    }
  }

  double worst_gae = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    RolloutBuffer b;
    for (int i = 0; i < 50; ++i) b.add({}, 0, 0.0, normal(rng, 0, 1), normal(rng, 1, 1), uniform01(rng) < 0.08);
    const double last = normal(rng, 0, 1), gamma = 0.99, lambda = 0.95;
    const GaeResult g = compute_gae(b, last, gamma, lambda);
    for (std::size_t t = 0; t < b.size(); ++t) {
      double sum = 0.0, weight = 1.0;
      for (std::size_t k = t; k < b.size(); ++k) {
        const double next_v = b.dones[k] ? 0.0 : (k + 1 < b.size() ? b.values[k + 1] : last);
        sum += weight * (b.rewards[k] + gamma * next_v - b.values[k]);
        if (b.dones[k]) break;
        weight *= gamma * lambda;
      }
      worst_gae = std::max(worst_gae, std::abs(g.advantages[t] - sum));
    }
  }
  return {worst_grad < 1e-4 && worst_gae <= 1e-10,
          fmt("gradient rel. err %.3g over 10 points, GAE deviation %.3g over 20x50 steps", worst_grad, worst_gae)};
}

RunConfig desk_config() {
  RunConfig c;
  apply_preset(c, "cs2-low");
  c.episode.max_steps = 200;
  c.ppo.learning_rate = 1e-3;
  c.general.seed = 1;
  return c;
}

Outcome desk_learning() {
  const auto root = work_dir() / "c10";
  RunConfig tune_cfg;
  apply_preset(tune_cfg, "cs1");
  tune_cfg.general.seed = 1;
  const TuneResult tuned = cmd_tune_pid(tune_cfg, root / "tune", 3);

  RunConfig base = desk_config();
  base.ibvs = tuned.best;
  auto eval_with = [&](ControllerKind kind, const std::string& name) {
    RunConfig c = base;
    c.general.controller = kind;
    c.general.episodes = 25;
    return cmd_eval(c, root / name).summary;
  };
  const EvalSummary random = eval_with(ControllerKind::Random, "random");
  const EvalSummary pid = eval_with(ControllerKind::Pid, "pid");

  const auto start = std::chrono::steady_clock::now();
  const TrainResult trained = cmd_train(base, root / "rl", false);
  const double train_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const EvalSummary rl = eval_with(ControllerKind::Rl, "rl");

  std::vector<double> index, lengths;
  for (std::size_t i = 0; i < trained.curves.size(); ++i) {
    index.push_back(static_cast<double>(i));
    lengths.push_back(trained.curves[i].mean_length);
  }
  const double rho = spearman(index, lengths);

  const bool pass = train_s <= 7200.0 && rl.length.median >= 3.0 * random.length.median &&
                    rl.length.median >= pid.length.median && rl.distance_error.median <= pid.distance_error.median &&
                    rho > 0.5;
  std::string detail = fmt("median length rl %.0f, random %.0f, pid %.0f", rl.length.median, random.length.median,
                           pid.length.median);
  detail += fmt("; median |d-8| rl %.3f, pid %.3f", rl.distance_error.median, pid.distance_error.median);
  detail += fmt("; training %.1f s, length-curve Spearman %.3f", train_s, rho);
  return {pass, detail};
}

Outcome determinism() {
  const auto root = work_dir() / "c11";
  RunConfig c = desk_config();
  c.ppo.total_timesteps = 8192;
  c.general.controller = ControllerKind::Rl;
  c.general.episodes = 10;
  for (const char* name : {"a", "b"}) {
    cmd_train(c, root / name, false);
    cmd_eval(c, root / name);
  }
  const bool curves = slurp(root / "a" / "curves.csv") == slurp(root / "b" / "curves.csv");
  const bool episodes = slurp(root / "a" / "episodes.csv") == slurp(root / "b" / "episodes.csv");
  const bool nonempty = !slurp(root / "a" / "curves.csv").empty() && !slurp(root / "a" / "episodes.csv").empty();
  return {curves && episodes && nonempty,
          std::string("curves ") + (curves ? "identical" : "differ") + ", episode tables " +
              (episodes ? "identical" : "differ")};
}

struct Criterion {
  int id;
  const char* name;
  double limit_s;  // <= 0: no runtime bound
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "APCE exactness", 1.0, apce_exactness},
      {2, "KCF kernel correlation vs brute force", 10.0, kcf_oracle},
      {3, "KCF tracking accuracy", 30.0, kcf_tracking},
      {4, "fusion robustness", 300.0, fusion_robustness},
      {5, "throughput under detector latency", 600.0, throughput},
      {6, "reward spot values", 0.0, reward_spots},
      {7, "action table", 0.0, action_table},
      {8, "termination logic", 0.0, termination_logic},
      {9, "PPO numerics", 30.0, ppo_numerics},
      {10, "desk-scale learning", 0.0, desk_learning},
      {11, "determinism", 0.0, determinism},
  };
  // The shared dataset is rendered once, outside the timed criteria.
  const auto gen_start = std::chrono::steady_clock::now();
  try {
    standard_dataset();
  } catch (const std::exception& e) {
    std::cout << "dataset generation failed: " << e.what() << "\n";
    return 1;
  }
  std::cout << fmt("dataset rendered in %.1f s\n",
                   std::chrono::duration<double>(std::chrono::steady_clock::now() - gen_start).count());

  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.limit_s > 0 && secs > c.limit_s) {
      o.pass = false;
      o.detail += fmt(" (over the %.0f s limit)", c.limit_s);
    }
    failed += o.pass ? 0 : 1;
    std::cout << (o.pass ? "[PASS] " : "[FAIL] ") << c.id << ". " << c.name << fmt(" (%.2f s): ", secs) << o.detail
              << std::endl;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}
