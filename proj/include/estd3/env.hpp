#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace estd3 {

struct EnvSpec {
  int obs_dim = 0;
  int act_dim = 0;
  double action_bound = 1.0;
  int max_steps = 0;
};

/// One environment step. `terminated` is the episode-over flag and is forced
/// true at max_steps; `truncated` marks the case where the episode ended only
/// because of the step limit (TD3 must not mask its bootstrap there).
struct StepResult {
  std::vector<double> observation;
  double reward = 0.0;
  bool terminated = false;
  bool truncated = false;
};

/// One (s, a, s', r, terminal) record. `terminated` here is the bootstrap
/// mask: true only for genuine environment termination, never for time limits.
struct Transition {
  std::vector<double> state;
  std::vector<double> action;
  std::vector<double> next_state;
  double reward = 0.0;
  bool terminated = false;
};

struct Trajectory {
  std::vector<Transition> transitions;
  double fitness = 0.0;  // plain sum of member rewards, in order
};

/// Deterministic continuous-control environment. Instances are single
/// threaded; run many instances for parallel evaluation.
class Env {
 public:
  virtual ~Env() = default;
  virtual const EnvSpec& spec() const = 0;
  /// Start state. Deterministic per seed (v1 dynamics ignore the seed).
  virtual std::vector<double> reset(std::uint64_t seed) = 0;
  /// Applies the dynamics; actions are silently clipped to the action bound.
  /// Throws std::logic_error when called after the episode ended.
  virtual StepResult step(std::span<const double> action) = 0;
};

/// Factory by configuration name: "pointmass2d", "pendulum", "corridor".
/// Throws std::invalid_argument for unknown names.
std::unique_ptr<Env> make_env(const std::string& name);

using Policy = std::function<std::vector<double>(std::span<const double>)>;
using EnvFactory = std::function<std::unique_ptr<Env>()>;

struct EvalResult {
  double fitness = 0.0;
  Trajectory trajectory;
};

/// Rolls one full episode under the deterministic policy, no exploration
/// noise. fitness is the undiscounted reward sum and equals
/// trajectory.fitness exactly.
EvalResult evaluate(const Policy& policy, Env& env, std::uint64_t seed);

}  // namespace estd3
