#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "estd3/env.hpp"
#include "estd3/mlp.hpp"
#include "estd3/optim.hpp"
#include "estd3/rng.hpp"

namespace estd3 {

struct Td3Hypers {
  double gamma = 0.99;
  double tau = 0.005;
  int policy_delay = 2;
  double explore_noise_std = 0.1;
  double target_noise_std = 0.2;
  double target_noise_clip = 0.5;
  int batch_size = 256;
  double learning_rate = 0.0003;
};

/// Twin-critic deterministic actor-critic. Both critics share one Adam state
/// over their concatenated parameters; targets start as exact copies of the
/// online networks.
struct Td3Agent {
  Mlp actor;
  Mlp critic0;
  Mlp critic1;
  Mlp target_actor;
  Mlp target_critic0;
  Mlp target_critic1;
  AdamState actor_opt;
  AdamState critic_opt;
  long update_count = 0;
  double action_bound = 1.0;
};

/// Actor: [obs, hidden..., act] with ScaledTanh(action_bound) output.
/// Critics: [obs + act, hidden..., 1] with Identity output, the action
/// concatenated onto the state at the input layer.
Td3Agent make_td3_agent(int obs_dim, int act_dim, double action_bound,
                        std::span<const int> hidden_sizes, std::uint64_t seed);

/// clip(pi(obs) + N(0, explore_noise_std^2), +-action_bound) per component.
std::vector<double> select_action(const Td3Agent& agent,
                                  std::span<const double> obs,
                                  const Td3Hypers& hypers, Rng& rng);

/// Clipped double-Q targets with target policy smoothing:
/// y = r + (1 - terminated) * gamma * min(Q'_0, Q'_1)(s', a') where
/// a' = clip(pi'(s') + clip(noise, +-c), +-bound).
std::vector<double> compute_targets(const Td3Agent& agent,
                                    std::span<const Transition> batch,
                                    const Td3Hypers& hypers, Rng& rng);

/// One Adam step per critic on the MSE to the shared targets. Returns the
/// two losses; increments update_count.
std::pair<double, double> critic_update(Td3Agent& agent,
                                        std::span<const Transition> batch,
                                        std::span<const double> targets,
                                        const Td3Hypers& hypers);

/// One Adam ascent step on mean Q_0(s, pi(s)); critics are left untouched.
/// Returns the descent loss -mean Q_0(s, pi(s)).
double actor_update(Td3Agent& agent, std::span<const Transition> batch,
                    const Td3Hypers& hypers);

/// target <- tau * online + (1 - tau) * target, parameter-wise.
/// Throws std::invalid_argument on spec mismatch.
void soft_update(Mlp& target, const Mlp& online, double tau);

struct Td3StepInfo {
  double critic_loss0 = 0.0;
  double critic_loss1 = 0.0;
  bool actor_updated = false;
  double actor_loss = 0.0;
};

/// Full TD3 step: targets, critic update, and every policy_delay-th time the
/// actor update plus soft updates of all three target networks.
Td3StepInfo td3_update(Td3Agent& agent, std::span<const Transition> batch,
                       const Td3Hypers& hypers, Rng& rng);

}  // namespace estd3
