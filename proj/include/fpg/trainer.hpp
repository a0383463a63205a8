#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fpg/analytic.hpp"
#include "fpg/critic.hpp"
#include "fpg/policy.hpp"
#include "fpg/turntable.hpp"

namespace fpg {

enum class TrainMethod { kEpgAnalytic, kSpgM0, kSpgM1, kSpgM2 };

TrainMethod parse_method(const std::string& name);
std::string method_name(TrainMethod method);

// Linear map from state features to the policy mean, with a shared isotropic
// scale that can optionally be learned.
struct LinearPolicyHead {
  Matrix weights;  // action dim x feature dim
  double sigma = 0.05;
  bool learn_sigma = false;
};

struct TrainConfig {
  TrainMethod method = TrainMethod::kEpgAnalytic;
  int steps = 20000;
  double gamma = 0.9;
  double actor_lr = 0.05;
  double critic_lr = 0.02;
  std::uint64_t seed = 0;
  std::string optimizer = "sgd";  // or "sgd-momentum"
  double momentum = 0.9;
  double sigma = 0.05;
  bool learn_sigma = false;
  bool actor_uses_abs_term = true;
  bool zero_critic_init = false;
};

void validate(const TrainConfig& config);

struct CurveRow {
  long long step = 0;
  int episode = 0;
  double episode_return = 0.0;    // running undiscounted return within the episode
  double mean_action_error = 0.0;  // trailing-window mean |policy mean - optimal|
  double grad_norm = 0.0;
};

struct LearningCurve {
  std::vector<CurveRow> rows;
  bool diverged = false;
  std::string diagnostics;
};

struct TrajectoryRow {
  int episode = 0;
  int step = 0;  // step within the episode
  double angle = 0.0;
  double target = 0.0;
  double action = 0.0;  // executed (clipped) action
  double reward = 0.0;
};

// State featurization [sin(angle + target), cos(angle + target), 1].
Vector features(const TurntableState& state);

GaussianPolicy head_policy(const LinearPolicyHead& head, const TurntableState& state);

struct WeightGradient {
  Matrix weights;
  double sigma = 0.0;
};

// Chain rule through the linear head: outer product of the mean gradient with
// the features, plus the scale path when sigma is learnable.
WeightGradient chain_rule_update(const LinearPolicyHead& head,
                                 const TurntableState& state,
                                 const GradientUpdate& inner);

// The periodic-plus-absolute turntable critic with standard or zero
// coefficient initialization.
HybridCritic make_turntable_critic(bool zero_init);

struct TrainResult {
  LearningCurve curve;
  LinearPolicyHead head;
  HybridCritic critic;
  std::vector<TrajectoryRow> trajectory;
};

TrainResult run_full(const EnvConfig& env_config, const TrainConfig& config);
LearningCurve run(const EnvConfig& env_config, const TrainConfig& config);

// Simplex reparameterization helpers for mixture weights.
Vector softmax(const Vector& logits);
Matrix softmax_jacobian(const Vector& logits);

}  // namespace fpg
