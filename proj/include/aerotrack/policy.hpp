#pragma once

#include "aerotrack/imaging.hpp"
#include "aerotrack/rng.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <vector>

namespace aerotrack {

struct NetworkDims {
  int input = 45;
  int hidden1 = 64;
  int hidden2 = 64;
  int actions = 13;

  std::size_t parameter_count() const {
    const auto i = static_cast<std::size_t>(input), h1 = static_cast<std::size_t>(hidden1),
               h2 = static_cast<std::size_t>(hidden2), a = static_cast<std::size_t>(actions);
    return h1 * i + h1 + h2 * h1 + h2 + a * h2 + a + h2 + 1;
  }
  friend bool operator==(const NetworkDims&, const NetworkDims&) = default;
};

/// Two-layer tanh trunk with a categorical head and a value head.
///
/// All parameters live in one flat vector in declaration order W1, b1, W2, b2, Wpi, bpi, Wv, bv;
/// weight matrices are stored row-major as [out][in].
template <typename T>
class ActorCritic {
 public:
  using Vector = Eigen::Matrix<T, Eigen::Dynamic, 1>;
  using RowVector = Eigen::Matrix<T, 1, Eigen::Dynamic>;
  using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;  // one column per sample
  using Weights = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using WeightMap = Eigen::Map<Weights>;
  using ConstWeightMap = Eigen::Map<const Weights>;
  using BiasMap = Eigen::Map<Vector>;
  using ConstBiasMap = Eigen::Map<const Vector>;

  /// Intermediate values of a batched forward pass, kept for backprop.
  struct Activations {
    Matrix input;    // input x B
    Matrix hidden1;  // hidden1 x B, after tanh
    Matrix hidden2;  // hidden2 x B, after tanh
    Matrix logits;   // actions x B
    RowVector values;
  };

  explicit ActorCritic(NetworkDims dims = {})
      : dims_(dims), params_(Vector::Zero(static_cast<Eigen::Index>(dims.parameter_count()))) {
    if (dims.input <= 0 || dims.hidden1 <= 0 || dims.hidden2 <= 0 || dims.actions <= 0)
      throw Error("network dimensions must be positive");
  }

  /// Normal weights with std gain/sqrt(fan_in): gain sqrt(2) on the trunk, 0.01 on the policy
  /// head, 1 on the value head. Biases start at zero.
  static ActorCritic initialized(NetworkDims dims, Rng& rng) {
    ActorCritic net(dims);
    auto fill = [&rng](auto&& w, double scale) {
      const double sigma = scale / std::sqrt(static_cast<double>(w.cols()));
      for (Eigen::Index r = 0; r < w.rows(); ++r)
        for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = static_cast<T>(normal(rng, 0.0, sigma));
    };
    fill(net.W1(), std::sqrt(2.0));
    fill(net.W2(), std::sqrt(2.0));
    fill(net.Wpi(), 0.01);
    fill(net.Wv(), 1.0);
    return net;
  }

  const NetworkDims& dims() const { return dims_; }
  Vector& params() { return params_; }
  const Vector& params() const { return params_; }

  WeightMap W1() { return weights(0, dims_.hidden1, dims_.input); }
  BiasMap b1() { return bias(off_b1(), dims_.hidden1); }
  WeightMap W2() { return weights(off_W2(), dims_.hidden2, dims_.hidden1); }
  BiasMap b2() { return bias(off_b2(), dims_.hidden2); }
  WeightMap Wpi() { return weights(off_Wpi(), dims_.actions, dims_.hidden2); }
  BiasMap bpi() { return bias(off_bpi(), dims_.actions); }
  WeightMap Wv() { return weights(off_Wv(), 1, dims_.hidden2); }
  BiasMap bv() { return bias(off_bv(), 1); }

  ConstWeightMap W1() const { return weights(0, dims_.hidden1, dims_.input); }
  ConstBiasMap b1() const { return bias(off_b1(), dims_.hidden1); }
  ConstWeightMap W2() const { return weights(off_W2(), dims_.hidden2, dims_.hidden1); }
  ConstBiasMap b2() const { return bias(off_b2(), dims_.hidden2); }
  ConstWeightMap Wpi() const { return weights(off_Wpi(), dims_.actions, dims_.hidden2); }
  ConstBiasMap bpi() const { return bias(off_bpi(), dims_.actions); }
  ConstWeightMap Wv() const { return weights(off_Wv(), 1, dims_.hidden2); }
  ConstBiasMap bv() const { return bias(off_bv(), 1); }

  Activations forward(const Matrix& inputs) const {
    if (inputs.rows() != dims_.input) throw Error("observation has wrong dimension");
    if (!inputs.allFinite()) throw Error("non-finite observation");
    Activations a;
    a.input = inputs;
    a.hidden1 = ((W1() * inputs).colwise() + b1()).array().tanh().matrix();
    a.hidden2 = ((W2() * a.hidden1).colwise() + b2()).array().tanh().matrix();
    a.logits = (Wpi() * a.hidden2).colwise() + bpi();
    a.values = ((Wv() * a.hidden2).array() + bv()(0)).matrix();
    return a;
  }

  /// Gradient of a scalar loss given its derivatives with respect to logits and values.
  ActorCritic backward(const Activations& a, const Matrix& d_logits, const RowVector& d_values) const {
    ActorCritic g(dims_);
    g.Wpi() = d_logits * a.hidden2.transpose();
    g.bpi() = d_logits.rowwise().sum();
    g.Wv() = d_values * a.hidden2.transpose();
    g.bv()(0) = d_values.sum();

    Matrix d_h2 = Wpi().transpose() * d_logits + Wv().transpose() * d_values;
    d_h2.array() *= T(1) - a.hidden2.array().square();
    g.W2() = d_h2 * a.hidden1.transpose();
    g.b2() = d_h2.rowwise().sum();

    Matrix d_h1 = W2().transpose() * d_h2;
    d_h1.array() *= T(1) - a.hidden1.array().square();
    g.W1() = d_h1 * a.input.transpose();
    g.b1() = d_h1.rowwise().sum();
    return g;
  }

  template <typename U>
  ActorCritic<U> cast() const {
    ActorCritic<U> out(dims_);
    out.params() = params_.template cast<U>();
    return out;
  }

 private:
  std::size_t off_b1() const { return static_cast<std::size_t>(dims_.hidden1) * dims_.input; }
  std::size_t off_W2() const { return off_b1() + dims_.hidden1; }
  std::size_t off_b2() const { return off_W2() + static_cast<std::size_t>(dims_.hidden2) * dims_.hidden1; }
  std::size_t off_Wpi() const { return off_b2() + dims_.hidden2; }
  std::size_t off_bpi() const { return off_Wpi() + static_cast<std::size_t>(dims_.actions) * dims_.hidden2; }
  std::size_t off_Wv() const { return off_bpi() + dims_.actions; }
  std::size_t off_bv() const { return off_Wv() + dims_.hidden2; }

  WeightMap weights(std::size_t off, int rows, int cols) { return WeightMap(params_.data() + off, rows, cols); }
  ConstWeightMap weights(std::size_t off, int rows, int cols) const {
    return ConstWeightMap(params_.data() + off, rows, cols);
  }
  BiasMap bias(std::size_t off, int n) { return BiasMap(params_.data() + off, n); }
  ConstBiasMap bias(std::size_t off, int n) const { return ConstBiasMap(params_.data() + off, n); }

  NetworkDims dims_;
  Vector params_;
};

/// Numerically stable log-softmax of one logit column.
template <typename T>
Eigen::Matrix<T, Eigen::Dynamic, 1> log_softmax(const Eigen::Matrix<T, Eigen::Dynamic, 1>& logits) {
  const T m = logits.maxCoeff();
  const T lse = m + std::log((logits.array() - m).exp().sum());
  return (logits.array() - lse).matrix();
}

template <typename T>
Eigen::Matrix<T, Eigen::Dynamic, 1> softmax(const Eigen::Matrix<T, Eigen::Dynamic, 1>& logits) {
  return log_softmax<T>(logits).array().exp().matrix();
}

struct SampledAction {
  int index = 0;
  double log_prob = 0.0;
};

/// Categorical draw from softmax(logits) by inverse CDF over one uniform variate.
template <typename T>
SampledAction sample_action(const Eigen::Matrix<T, Eigen::Dynamic, 1>& logits, Rng& rng) {
  const Eigen::VectorXd logp = log_softmax<T>(logits).template cast<double>();
  const double u = uniform01(rng);
  double cdf = 0.0;
  int chosen = static_cast<int>(logp.size()) - 1;
  for (Eigen::Index i = 0; i < logp.size(); ++i) {
    cdf += std::exp(logp(i));
    if (u < cdf) {
      chosen = static_cast<int>(i);
      break;
    }
  }
  // Rounding can leave the tail with zero mass; never return an impossible action.
  while (chosen > 0 && std::exp(logp(chosen)) == 0.0) --chosen;
  return {chosen, logp(chosen)};
}

template <typename T>
int greedy_action(const Eigen::Matrix<T, Eigen::Dynamic, 1>& logits) {
  Eigen::Index best = 0;
  logits.maxCoeff(&best);
  return static_cast<int>(best);
}

/// min(r A, clip(r, 1 - eps, 1 + eps) A)
template <typename T>
T clipped_surrogate(T ratio, T advantage, T clip) {
  const T clipped = std::clamp(ratio, T(1) - clip, T(1) + clip);
  return std::min(ratio * advantage, clipped * advantage);
}

/// One minibatch of PPO training data; observations are stored one per column.
template <typename T>
struct PpoBatch {
  typename ActorCritic<T>::Matrix observations;
  std::vector<int> actions;
  std::vector<T> old_log_probs;
  std::vector<T> advantages;
  std::vector<T> returns;

  std::size_t size() const { return actions.size(); }
};

struct LossTerms {
  double total = 0.0;
  double policy = 0.0;      // -mean clipped surrogate
  double value = 0.0;       // mean squared error vs returns
  double entropy = 0.0;     // mean policy entropy
  double unclipped = 0.0;   // mean unclipped surrogate r A
  double approx_kl = 0.0;   // mean (old_logp - logp)
  double clip_fraction = 0.0;
};

/// PPO objective to minimize, policy - c_e entropy + c_v value, and its exact gradient.
template <typename T>
std::pair<LossTerms, ActorCritic<T>> ppo_loss(const ActorCritic<T>& net, const PpoBatch<T>& batch, T clip,
                                              T value_coef, T entropy_coef) {
  using Matrix = typename ActorCritic<T>::Matrix;
  using RowVector = typename ActorCritic<T>::RowVector;
  using Vector = typename ActorCritic<T>::Vector;
  const auto n = static_cast<Eigen::Index>(batch.size());
  if (n == 0) throw Error("empty batch");
  const auto act = net.forward(batch.observations);
  const T inv_n = T(1) / static_cast<T>(n);

  Matrix d_logits(act.logits.rows(), n);
  RowVector d_values(n);
  T policy_sum = 0, value_sum = 0, entropy_sum = 0, unclipped_sum = 0, kl_sum = 0;
  int clipped_count = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vector logits = act.logits.col(i);
    const Vector logp = log_softmax<T>(logits);
    const Vector p = logp.array().exp().matrix();
    const int a = batch.actions[static_cast<std::size_t>(i)];
    const T adv = batch.advantages[static_cast<std::size_t>(i)];
    const T old_lp = batch.old_log_probs[static_cast<std::size_t>(i)];
    const T ratio = std::exp(logp(a) - old_lp);

    const T surrogate = clipped_surrogate(ratio, adv, clip);
    policy_sum -= surrogate;
    unclipped_sum += ratio * adv;
    kl_sum += old_lp - logp(a);
    if (std::abs(ratio - T(1)) > clip) ++clipped_count;

    const T entropy = -(p.array() * logp.array()).sum();
    entropy_sum += entropy;

    // d(-surrogate)/d logits: the unclipped branch is active when it attains the min.
    const T d_ratio = (ratio * adv <= std::clamp(ratio, T(1) - clip, T(1) + clip) * adv) ? adv : T(0);
    Vector g = -d_ratio * ratio * (-p);
    g(a) += -d_ratio * ratio;
    // d(-c_e H)/d logits = c_e p (log p + H)
    g.array() += entropy_coef * p.array() * (logp.array() + entropy);
    d_logits.col(i) = g * inv_n;

    const T err = act.values(i) - batch.returns[static_cast<std::size_t>(i)];
    value_sum += err * err;
    d_values(i) = T(2) * value_coef * err * inv_n;
  }

  LossTerms terms;
  terms.policy = static_cast<double>(policy_sum * inv_n);
  terms.value = static_cast<double>(value_sum * inv_n);
  terms.entropy = static_cast<double>(entropy_sum * inv_n);
  terms.unclipped = static_cast<double>(unclipped_sum * inv_n);
  terms.approx_kl = static_cast<double>(kl_sum * inv_n);
  terms.clip_fraction = static_cast<double>(clipped_count) / static_cast<double>(n);
  terms.total = static_cast<double>(policy_sum * inv_n + value_coef * value_sum * inv_n -
                                    entropy_coef * entropy_sum * inv_n);
  return {terms, net.backward(act, d_logits, d_values)};
}

inline constexpr char kCheckpointMagic[8] = {'A', 'T', 'R', 'K', 'P', 'P', 'O', '\0'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

namespace policy_detail {
inline void put_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 4);
}
inline std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw Error("truncated checkpoint");
  return std::uint32_t{b[0]} | std::uint32_t{b[1]} << 8 | std::uint32_t{b[2]} << 16 | std::uint32_t{b[3]} << 24;
}
}  // namespace policy_detail

/// Magic, version, the four dims, then every parameter as a little-endian float32.
template <typename T>
void save_checkpoint(const std::filesystem::path& path, const ActorCritic<T>& net) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write checkpoint: " + path.string());
  out.write(kCheckpointMagic, sizeof kCheckpointMagic);
  policy_detail::put_u32(out, kCheckpointVersion);
  const NetworkDims& d = net.dims();
  for (int v : {d.input, d.hidden1, d.hidden2, d.actions}) policy_detail::put_u32(out, static_cast<std::uint32_t>(v));
  for (Eigen::Index i = 0; i < net.params().size(); ++i)
    policy_detail::put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(net.params()(i))));
  if (!out) throw Error("failed writing checkpoint: " + path.string());
}

template <typename T = float>
ActorCritic<T> load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint: " + path.string());
  char magic[sizeof kCheckpointMagic];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kCheckpointMagic, sizeof magic) != 0)
    throw Error("not a policy checkpoint: " + path.string());
  if (policy_detail::get_u32(in) != kCheckpointVersion) throw Error("unsupported checkpoint version");
  NetworkDims d;
  d.input = static_cast<int>(policy_detail::get_u32(in));
  d.hidden1 = static_cast<int>(policy_detail::get_u32(in));
  d.hidden2 = static_cast<int>(policy_detail::get_u32(in));
  d.actions = static_cast<int>(policy_detail::get_u32(in));
  ActorCritic<T> net(d);
  for (Eigen::Index i = 0; i < net.params().size(); ++i)
    net.params()(i) = static_cast<T>(std::bit_cast<float>(policy_detail::get_u32(in)));
  if (in.peek() != std::char_traits<char>::eof()) throw Error("trailing bytes in checkpoint");
  return net;
}

}  // namespace aerotrack
