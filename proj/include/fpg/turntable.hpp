#pragma once

#include <cstdint>

#include "fpg/rng.hpp"

namespace fpg {

// Maps any finite angle into (-pi, pi].
double wrap_angle(double x);

struct TurntableState {
  double angle = 0.0;   // wrapped to (-pi, pi]
  double target = 0.0;  // wrapped to (-pi, pi]
};

struct EnvConfig {
  int episode_length = 50;
  std::uint64_t seed = 0;
};

struct StepResult {
  TurntableState next;
  double reward = 0.0;
  bool done = false;
  bool clipped = false;
};

// Draws angle and target uniformly on (-pi, pi] (angle first, then target).
TurntableState reset(const EnvConfig& config, RngStream& rng);

// Pure one-step dynamics: clips the action to [-pi, pi], rotates, and pays
// the reward at the post-action angle. Never sets `done`.
StepResult step_dynamics(const TurntableState& state, double a);

// Stateful episode wrapper counting steps and clip events.
class Turntable {
 public:
  explicit Turntable(EnvConfig config);

  TurntableState reset(RngStream& rng);
  StepResult step(double a);

  const TurntableState& state() const { return state_; }
  const EnvConfig& config() const { return config_; }
  int steps_taken() const { return steps_taken_; }
  long long clip_count() const { return clip_count_; }

 private:
  EnvConfig config_;
  TurntableState state_;
  int steps_taken_ = 0;
  long long clip_count_ = 0;
  bool episode_over_ = true;
};

// One-step-optimal action at combined phase phi = angle + target: the
// grid-searched maximizer of sin(phi + a) - |a|/4 over [-pi, pi].
double optimal_action(double phi);

}  // namespace fpg
