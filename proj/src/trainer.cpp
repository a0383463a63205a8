#include "fpg/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fpg/estimators.hpp"

namespace fpg {

TrainMethod parse_method(const std::string& name) {
  if (name == "epg-analytic") return TrainMethod::kEpgAnalytic;
  if (name == "spg-m0") return TrainMethod::kSpgM0;
  if (name == "spg-m1") return TrainMethod::kSpgM1;
  if (name == "spg-m2") return TrainMethod::kSpgM2;
  throw std::invalid_argument("unknown training method: " + name);
}

std::string method_name(TrainMethod method) {
  switch (method) {
    case TrainMethod::kEpgAnalytic:
      return "epg-analytic";
    case TrainMethod::kSpgM0:
      return "spg-m0";
    case TrainMethod::kSpgM1:
      return "spg-m1";
    default:
      return "spg-m2";
  }
}

void validate(const TrainConfig& config) {
  if (config.steps < 1) throw std::invalid_argument("TrainConfig: steps must be >= 1");
  if (!(config.gamma >= 0.0) || config.gamma >= 1.0) {
    throw std::invalid_argument("TrainConfig: gamma must lie in [0, 1)");
  }
  if (!(config.actor_lr >= 0.0) || !std::isfinite(config.actor_lr)) {
    throw std::invalid_argument("TrainConfig: actor_lr must be >= 0");
  }
  if (!(config.critic_lr > 0.0) || config.critic_lr > 1.0) {
    throw std::invalid_argument("TrainConfig: critic_lr must lie in (0, 1]");
  }
  if (config.optimizer != "sgd" && config.optimizer != "sgd-momentum") {
    throw std::invalid_argument("TrainConfig: optimizer must be sgd or sgd-momentum");
  }
  if (!(config.momentum >= 0.0) || config.momentum >= 1.0) {
    throw std::invalid_argument("TrainConfig: momentum must lie in [0, 1)");
  }
  if (!(config.sigma > 0.0)) {
    throw std::invalid_argument("TrainConfig: sigma must be positive");
  }
}

Vector features(const TurntableState& state) {
  const double phi = state.angle + state.target;
  Vector f(3);
  f << std::sin(phi), std::cos(phi), 1.0;
  return f;
}

GaussianPolicy head_policy(const LinearPolicyHead& head, const TurntableState& state) {
  if (!head.weights.allFinite() || !(head.sigma > 0.0)) {
    throw std::invalid_argument("LinearPolicyHead: weights must be finite, sigma > 0");
  }
  const Vector mean = head.weights * features(state);
  return GaussianPolicy(mean,
                        SpdFactor::scaled_identity(static_cast<int>(mean.size()),
                                                   head.sigma));
}

WeightGradient chain_rule_update(const LinearPolicyHead& head,
                                 const TurntableState& state,
                                 const GradientUpdate& inner) {
  const Vector f = features(state);
  if (head.weights.cols() != f.size()) {
    throw DimensionError("chain_rule_update: feature dimension mismatch");
  }
  WeightGradient grad;
  if (inner.grad_mean.has_value()) {
    if (inner.grad_mean->size() != head.weights.rows()) {
      throw DimensionError("chain_rule_update: action dimension mismatch");
    }
    grad.weights = *inner.grad_mean * f.transpose();
  } else {
    grad.weights = Matrix::Zero(head.weights.rows(), head.weights.cols());
  }
  grad.sigma = head.learn_sigma ? inner.grad_scale.trace() : 0.0;
  return grad;
}

HybridCritic make_turntable_critic(bool zero_init) {
  Vector unit_freq(1);
  unit_freq[0] = 1.0;
  std::vector<CriticAtom> atoms;
  atoms.emplace_back(TrigAtom(unit_freq, M_PI / 2.0));  // sin(phi + a) once shifted
  atoms.emplace_back(AbsAtom{});
  std::vector<double> coeffs =
      zero_init ? std::vector<double>{0.0, 0.0} : std::vector<double>{0.5, -0.25};
  return HybridCritic(std::move(atoms), std::move(coeffs));
}

namespace {

// Trailing-window mean over the last `capacity` values.
class RollingMean {
 public:
  explicit RollingMean(int capacity) : values_(capacity, 0.0) {}

  void push(double v) {
    const int capacity = static_cast<int>(values_.size());
    if (count_ >= capacity) sum_ -= values_[head_];
    values_[head_] = v;
    head_ = (head_ + 1) % capacity;
    sum_ += v;
    count_ = std::min(count_ + 1, capacity);
  }
  double mean() const { return count_ == 0 ? 0.0 : sum_ / count_; }

 private:
  std::vector<double> values_;
  int head_ = 0;
  int count_ = 0;
  double sum_ = 0.0;
};

Vector vec1(double x) {
  Vector v(1);
  v[0] = x;
  return v;
}

constexpr int kErrorWindow = 500;
constexpr double kDivergenceLimit = 1e6;
constexpr double kSigmaFloor = 1e-6;

}  // namespace

TrainResult run_full(const EnvConfig& env_config, const TrainConfig& config) {
  validate(config);
  RngStream root(config.seed);
  RngStream env_rng = root.split(1);
  RngStream policy_rng = root.split(2);

  Turntable env(env_config);
  HybridCritic critic = make_turntable_critic(config.zero_critic_init);
  LinearPolicyHead head{Matrix::Zero(1, 3), config.sigma, config.learn_sigma};
  Matrix velocity = Matrix::Zero(1, 3);
  double velocity_sigma = 0.0;
  const bool use_momentum = config.optimizer == "sgd-momentum";

  LearningCurve curve;
  curve.rows.reserve(config.steps);
  std::vector<TrajectoryRow> trajectory;
  trajectory.reserve(config.steps);
  RollingMean error_window(kErrorWindow);

  TurntableState state = env.reset(env_rng);
  int episode = 0;
  int t_in_episode = 0;
  double episode_return = 0.0;

  for (long long step = 1; step <= config.steps; ++step) {
    const double phi = wrap_angle(state.angle + state.target);
    StateParams conditioning;
    conditioning.phase_offset = -phi;

    const HybridCritic critic_at_s = condition(critic, conditioning);
    const HybridCritic actor_critic =
        config.actor_uses_abs_term
            ? critic_at_s
            : HybridCritic({critic_at_s.atoms()[0]}, {critic_at_s.coeffs()[0]});

    const GaussianPolicy policy = head_policy(head, state);
    GradientUpdate inner;
    Vector sampled_action;
    switch (config.method) {
      case TrainMethod::kEpgAnalytic:
        inner = hybrid_gradient(actor_critic, policy).first;
        break;
      case TrainMethod::kSpgM0:
      case TrainMethod::kSpgM1: {
        sampled_action = sample(policy, policy_rng);
        const int m = config.method == TrainMethod::kSpgM0 ? 0 : 1;
        inner = spg_update(EstimatorOrder(m), actor_critic, policy, sampled_action);
        break;
      }
      case TrainMethod::kSpgM2: {
        sampled_action = sample(policy, policy_rng);
        inner = spg_update(EstimatorOrder(1), actor_critic, policy, sampled_action);
        if (config.learn_sigma) {
          const GradientUpdate second =
              spg_update(EstimatorOrder(2), actor_critic, policy, sampled_action);
          inner.grad_cov = second.grad_cov;
          inner.grad_scale = second.grad_scale;
        } else {
          inner.grad_cov.setZero();
          inner.grad_scale.setZero();
        }
        break;
      }
    }

    const WeightGradient raw = chain_rule_update(head, state, inner);
    const double discount = t_in_episode == 0 ? 1.0 : std::pow(config.gamma, t_in_episode);
    const Matrix applied = discount * raw.weights;
    const double applied_sigma = discount * raw.sigma;
    const double grad_norm =
        std::sqrt(applied.squaredNorm() + applied_sigma * applied_sigma);
    if (!std::isfinite(grad_norm) || grad_norm > kDivergenceLimit) {
      curve.diverged = true;
      curve.diagnostics = "gradient norm " + std::to_string(grad_norm) + " at step " +
                          std::to_string(step) + " exceeds " +
                          std::to_string(kDivergenceLimit);
      break;
    }
    if (use_momentum) {
      velocity = config.momentum * velocity + applied;
      velocity_sigma = config.momentum * velocity_sigma + applied_sigma;
      head.weights += config.actor_lr * velocity;
      if (config.learn_sigma) {
        head.sigma = std::max(kSigmaFloor, head.sigma + config.actor_lr * velocity_sigma);
      }
    } else {
      head.weights += config.actor_lr * applied;
      if (config.learn_sigma) {
        head.sigma = std::max(kSigmaFloor, head.sigma + config.actor_lr * applied_sigma);
      }
    }

    // policy-mean error at the visited state, after the update
    const double mean_now = (head.weights * features(state))(0);
    const double err = std::abs(wrap_angle(mean_now - optimal_action(phi)));
    error_window.push(err);

    // act: analytic arms draw fresh from the updated policy, sampled arms
    // reuse the estimation sample
    double action;
    if (config.method == TrainMethod::kEpgAnalytic) {
      action = sample(head_policy(head, state), policy_rng)[0];
    } else {
      action = sampled_action[0];
    }
    const StepResult result = env.step(action);
    const double executed = std::clamp(action, -M_PI, M_PI);
    episode_return += result.reward;

    TrajectoryRow traj;
    traj.episode = episode;
    traj.step = t_in_episode;
    traj.angle = state.angle;
    traj.target = state.target;
    traj.action = executed;
    traj.reward = result.reward;
    trajectory.push_back(traj);

    // SARSA with a previewed next action from the current policy
    const double phi_next = wrap_angle(result.next.angle + result.next.target);
    StateParams next_conditioning;
    next_conditioning.phase_offset = -phi_next;
    const Vector preview = sample(head_policy(head, result.next), policy_rng);
    critic = sarsa_update(critic, conditioning, vec1(executed), result.reward, preview,
                          next_conditioning, config.critic_lr, config.gamma);

    CurveRow row;
    row.step = step;
    row.episode = episode;
    row.episode_return = episode_return;
    row.mean_action_error = error_window.mean();
    row.grad_norm = grad_norm;
    curve.rows.push_back(row);

    if (result.done) {
      ++episode;
      t_in_episode = 0;
      episode_return = 0.0;
      state = env.reset(env_rng);
    } else {
      ++t_in_episode;
      state = result.next;
    }
  }

  return TrainResult{std::move(curve), std::move(head), std::move(critic),
                     std::move(trajectory)};
}

LearningCurve run(const EnvConfig& env_config, const TrainConfig& config) {
  return run_full(env_config, config).curve;
}

Vector softmax(const Vector& logits) {
  if (logits.size() < 1) throw std::invalid_argument("softmax: empty input");
  const double top = logits.maxCoeff();
  Vector shifted = (logits.array() - top).exp();
  return shifted / shifted.sum();
}

Matrix softmax_jacobian(const Vector& logits) {
  const Vector p = softmax(logits);
  return Matrix(p.asDiagonal()) - p * p.transpose();
}

}  // namespace fpg
