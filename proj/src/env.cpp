#include "estd3/env.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace estd3 {

namespace {

constexpr double kDt = 0.1;

double clip(double v, double lo, double hi) {
  return std::min(std::max(v, lo), hi);
}

void check_action(const EnvSpec& spec, std::span<const double> action) {
  if (action.size() != static_cast<std::size_t>(spec.act_dim)) {
    throw std::invalid_argument("env: action length mismatch");
  }
}

// Base handling of the step counter and the done flag.
class StepCountedEnv : public Env {
 public:
  std::vector<double> reset(std::uint64_t seed) override {
    (void)seed;  // dynamics are deterministic; reset state is fixed
    steps_ = 0;
    done_ = false;
    return do_reset();
  }

  StepResult step(std::span<const double> action) override {
    if (done_) throw std::logic_error("env: step after episode end");
    check_action(spec(), action);
    ++steps_;
    StepResult res = do_step(action);
    if (steps_ >= spec().max_steps && !res.terminated) {
      res.terminated = true;
      res.truncated = true;
    }
    done_ = res.terminated;
    return res;
  }

 protected:
  virtual std::vector<double> do_reset() = 0;
  virtual StepResult do_step(std::span<const double> action) = 0;

 private:
  int steps_ = 0;
  bool done_ = true;  // must reset before stepping
};

// Point mass on the plane chasing the goal (1, 1). Velocity and action are
// clipped per component; reward is the negative Euclidean distance to the
// goal after the move. Never terminates before the step limit.
class PointMass2D final : public StepCountedEnv {
 public:
  const EnvSpec& spec() const override { return spec_; }

 protected:
  std::vector<double> do_reset() override {
    px_ = py_ = vx_ = vy_ = 0.0;
    return {px_, py_, vx_, vy_};
  }

  StepResult do_step(std::span<const double> action) override {
    const double ax = clip(action[0], -1.0, 1.0);
    const double ay = clip(action[1], -1.0, 1.0);
    vx_ = clip(vx_ + kDt * ax, -1.0, 1.0);
    vy_ = clip(vy_ + kDt * ay, -1.0, 1.0);
    px_ += kDt * vx_;
    py_ += kDt * vy_;
    StepResult res;
    res.observation = {px_, py_, vx_, vy_};
    res.reward = -std::hypot(px_ - 1.0, py_ - 1.0);
    return res;
  }

 private:
  EnvSpec spec_{.obs_dim = 4, .act_dim = 2, .action_bound = 1.0, .max_steps = 100};
  double px_ = 0.0, py_ = 0.0, vx_ = 0.0, vy_ = 0.0;
};

// Torque-limited pendulum swing-up starting hung down (theta = pi). Reward
// penalizes the wrapped angle, angular velocity and torque, all evaluated
// after the integration step.
class PendulumSwingUp final : public StepCountedEnv {
 public:
  const EnvSpec& spec() const override { return spec_; }

 protected:
  std::vector<double> do_reset() override {
    theta_ = std::numbers::pi;
    theta_dot_ = 0.0;
    return observe();
  }

  StepResult do_step(std::span<const double> action) override {
    const double u = clip(action[0], -2.0, 2.0);
    const double theta_acc =
        -10.0 * std::sin(theta_ + std::numbers::pi) * 1.5 + 3.0 * u;
    theta_dot_ = clip(theta_dot_ + kDt * theta_acc, -8.0, 8.0);
    theta_ += kDt * theta_dot_;
    const double w = wrap_angle(theta_);
    StepResult res;
    res.observation = observe();
    res.reward = -(w * w + 0.1 * theta_dot_ * theta_dot_ + 0.001 * u * u);
    return res;
  }

 private:
  std::vector<double> observe() const {
    return {std::cos(theta_), std::sin(theta_), theta_dot_};
  }

  // Maps into (-pi, pi].
  static double wrap_angle(double theta) {
    const double two_pi = 2.0 * std::numbers::pi;
    double w = std::fmod(theta + std::numbers::pi, two_pi);
    if (w <= 0.0) w += two_pi;
    return w - std::numbers::pi;
  }

  EnvSpec spec_{.obs_dim = 3, .act_dim = 1, .action_bound = 2.0, .max_steps = 200};
  double theta_ = std::numbers::pi;
  double theta_dot_ = 0.0;
};

// 1-D corridor with a deceptive payoff: +0.1 per step for sitting left of
// -1, +100 and termination for reaching +4. The local gradient points away
// from the goal.
class DeceptiveCorridor final : public StepCountedEnv {
 public:
  const EnvSpec& spec() const override { return spec_; }

 protected:
  std::vector<double> do_reset() override {
    x_ = 0.0;
    return {x_};
  }

  StepResult do_step(std::span<const double> action) override {
    const double a = clip(action[0], -1.0, 1.0);
    x_ = clip(x_ + 0.1 * a, -5.0, 5.0);
    StepResult res;
    res.observation = {x_};
    if (x_ >= 4.0) {
      res.reward = 100.0;
      res.terminated = true;
    } else if (x_ < -1.0) {
      res.reward = 0.1;
    } else {
      res.reward = 0.0;
    }
    return res;
  }

 private:
  EnvSpec spec_{.obs_dim = 1, .act_dim = 1, .action_bound = 1.0, .max_steps = 120};
  double x_ = 0.0;
};

}  // namespace

std::unique_ptr<Env> make_env(const std::string& name) {
  if (name == "pointmass2d") return std::make_unique<PointMass2D>();
  if (name == "pendulum") return std::make_unique<PendulumSwingUp>();
  if (name == "corridor") return std::make_unique<DeceptiveCorridor>();
  throw std::invalid_argument("unknown environment '" + name +
                              "' (expected pointmass2d, pendulum or corridor)");
}

EvalResult evaluate(const Policy& policy, Env& env, std::uint64_t seed) {
  EvalResult out;
  std::vector<double> obs = env.reset(seed);
  bool done = false;
  while (!done) {
    std::vector<double> action = policy(obs);
    StepResult res = env.step(action);
    Transition t;
    t.state = obs;
    t.action = std::move(action);
    t.next_state = res.observation;
    t.reward = res.reward;
    t.terminated = res.terminated && !res.truncated;
    out.trajectory.transitions.push_back(std::move(t));
    out.fitness += res.reward;
    obs = std::move(res.observation);
    done = res.terminated;
  }
  out.trajectory.fitness = out.fitness;
  return out;
}

}  // namespace estd3
