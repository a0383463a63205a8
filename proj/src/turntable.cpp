#include "fpg/turntable.hpp"

#include <cmath>
#include <stdexcept>

namespace fpg {

double wrap_angle(double x) {
  if (!std::isfinite(x)) {
    throw std::invalid_argument("wrap_angle: non-finite angle");
  }
  double y = std::remainder(x, 2.0 * M_PI);
  if (y <= -M_PI) y += 2.0 * M_PI;
  return y;
}

TurntableState reset(const EnvConfig& config, RngStream& rng) {
  if (config.episode_length < 1) {
    throw std::invalid_argument("EnvConfig: episode_length must be at least 1");
  }
  TurntableState state;
  state.angle = M_PI - 2.0 * M_PI * rng.uniform();
  state.target = M_PI - 2.0 * M_PI * rng.uniform();
  return state;
}

StepResult step_dynamics(const TurntableState& state, double a) {
  if (!std::isfinite(a)) {
    throw std::invalid_argument("step: non-finite action");
  }
  StepResult result;
  double applied = a;
  if (applied > M_PI) {
    applied = M_PI;
    result.clipped = true;
  } else if (applied < -M_PI) {
    applied = -M_PI;
    result.clipped = true;
  }
  result.next.angle = wrap_angle(state.angle + applied);
  result.next.target = state.target;
  result.reward = std::sin(result.next.angle + state.target) - 0.25 * std::abs(applied);
  return result;
}

Turntable::Turntable(EnvConfig config) : config_(config) {
  if (config_.episode_length < 1) {
    throw std::invalid_argument("EnvConfig: episode_length must be at least 1");
  }
}

TurntableState Turntable::reset(RngStream& rng) {
  state_ = fpg::reset(config_, rng);
  steps_taken_ = 0;
  episode_over_ = false;
  return state_;
}

StepResult Turntable::step(double a) {
  if (episode_over_) {
    throw std::logic_error("Turntable: step called before reset");
  }
  StepResult result = step_dynamics(state_, a);
  if (result.clipped) ++clip_count_;
  state_ = result.next;
  ++steps_taken_;
  result.done = steps_taken_ >= config_.episode_length;
  episode_over_ = result.done;
  return result;
}

double optimal_action(double phi) {
  auto gain = [phi](double a) { return std::sin(phi + a) - 0.25 * std::abs(a); };

  const int kGridPoints = 2000;
  double best_a = -M_PI;
  double best_value = gain(best_a);
  for (int i = 1; i <= kGridPoints; ++i) {
    const double a = -M_PI + 2.0 * M_PI * i / kGridPoints;
    const double value = gain(a);
    if (value > best_value) {
      best_value = value;
      best_a = a;
    }
  }

  // Ternary refinement within one grid cell on each side.
  double lo = best_a - 2.0 * M_PI / kGridPoints;
  double hi = best_a + 2.0 * M_PI / kGridPoints;
  lo = std::max(lo, -M_PI);
  hi = std::min(hi, M_PI);
  for (int iter = 0; iter < 100; ++iter) {
    const double m1 = lo + (hi - lo) / 3.0;
    const double m2 = hi - (hi - lo) / 3.0;
    if (gain(m1) < gain(m2)) {
      lo = m1;
    } else {
      hi = m2;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace fpg
