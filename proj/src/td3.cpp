#include "estd3/td3.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace estd3 {

namespace {

double clip(double v, double lo, double hi) {
  return std::min(std::max(v, lo), hi);
}

std::vector<double> concat_state_action(std::span<const double> s,
                                        std::span<const double> a) {
  std::vector<double> in;
  in.reserve(s.size() + a.size());
  in.insert(in.end(), s.begin(), s.end());
  in.insert(in.end(), a.begin(), a.end());
  return in;
}

// Mean-squared-error gradient of one critic over the batch, flattened.
// Returns {loss, grad}.
std::pair<double, std::vector<double>> critic_loss_grad(
    const Mlp& critic, std::span<const Transition> batch,
    std::span<const double> targets) {
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  std::vector<double> grad(static_cast<std::size_t>(critic.spec.param_count()),
                           0.0);
  double loss = 0.0;
  for (std::size_t k = 0; k < batch.size(); ++k) {
    const std::vector<double> in =
        concat_state_action(batch[k].state, batch[k].action);
    const ForwardTrace trace = forward_cached(critic, in);
    const double q = trace_output(trace)[0];
    const double residual = q - targets[k];
    loss += residual * residual * inv_b;
    const double upstream = 2.0 * residual * inv_b;
    BackwardResult b = backward(critic, trace, std::vector<double>{upstream});
    for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += b.param_grad[i];
  }
  return {loss, std::move(grad)};
}

}  // namespace

Td3Agent make_td3_agent(int obs_dim, int act_dim, double action_bound,
                        std::span<const int> hidden_sizes, std::uint64_t seed) {
  MlpSpec actor_spec;
  actor_spec.layer_sizes.push_back(obs_dim);
  actor_spec.layer_sizes.insert(actor_spec.layer_sizes.end(),
                                hidden_sizes.begin(), hidden_sizes.end());
  actor_spec.layer_sizes.push_back(act_dim);
  actor_spec.output = OutputActivation::ScaledTanh;
  actor_spec.output_bound = action_bound;

  MlpSpec critic_spec;
  critic_spec.layer_sizes.push_back(obs_dim + act_dim);
  critic_spec.layer_sizes.insert(critic_spec.layer_sizes.end(),
                                 hidden_sizes.begin(), hidden_sizes.end());
  critic_spec.layer_sizes.push_back(1);
  critic_spec.output = OutputActivation::Identity;

  Mlp actor = mlp_init(actor_spec, derive_seed(seed, 0));
  Mlp critic0 = mlp_init(critic_spec, derive_seed(seed, 1));
  Mlp critic1 = mlp_init(critic_spec, derive_seed(seed, 2));

  const std::size_t actor_n = static_cast<std::size_t>(actor_spec.param_count());
  const std::size_t critic_n =
      2 * static_cast<std::size_t>(critic_spec.param_count());

  Td3Agent agent{.actor = actor,
                 .critic0 = critic0,
                 .critic1 = critic1,
                 .target_actor = actor,
                 .target_critic0 = critic0,
                 .target_critic1 = critic1,
                 .actor_opt = AdamState(actor_n),
                 .critic_opt = AdamState(critic_n),
                 .update_count = 0,
                 .action_bound = action_bound};
  return agent;
}

std::vector<double> select_action(const Td3Agent& agent,
                                  std::span<const double> obs,
                                  const Td3Hypers& hypers, Rng& rng) {
  std::vector<double> action = agent.actor.forward(obs);
  for (double& a : action) {
    a = clip(a + rng.normal(0.0, hypers.explore_noise_std), -agent.action_bound,
             agent.action_bound);
  }
  return action;
}

std::vector<double> compute_targets(const Td3Agent& agent,
                                    std::span<const Transition> batch,
                                    const Td3Hypers& hypers, Rng& rng) {
  if (batch.empty()) throw std::invalid_argument("td3: empty batch");
  std::vector<double> targets(batch.size());
  for (std::size_t k = 0; k < batch.size(); ++k) {
    const Transition& t = batch[k];
    if (t.terminated) {
      targets[k] = t.reward;
      continue;
    }
    std::vector<double> next_action = agent.target_actor.forward(t.next_state);
    for (double& a : next_action) {
      const double noise = clip(rng.normal(0.0, hypers.target_noise_std),
                                -hypers.target_noise_clip,
                                hypers.target_noise_clip);
      a = clip(a + noise, -agent.action_bound, agent.action_bound);
    }
    const std::vector<double> in =
        concat_state_action(t.next_state, next_action);
    const double q0 = agent.target_critic0.forward(in)[0];
    const double q1 = agent.target_critic1.forward(in)[0];
    targets[k] = t.reward + hypers.gamma * std::min(q0, q1);
  }
  return targets;
}

std::pair<double, double> critic_update(Td3Agent& agent,
                                        std::span<const Transition> batch,
                                        std::span<const double> targets,
                                        const Td3Hypers& hypers) {
  if (batch.size() != targets.size()) {
    throw std::invalid_argument("td3: batch/target size mismatch");
  }
  auto [loss0, grad0] = critic_loss_grad(agent.critic0, batch, targets);
  auto [loss1, grad1] = critic_loss_grad(agent.critic1, batch, targets);
  if (!std::isfinite(loss0) || !std::isfinite(loss1)) {
    throw std::domain_error("td3: non-finite critic loss");
  }

  // Both critics live under one optimizer, concatenated critic0 | critic1.
  std::vector<double> params = flatten(agent.critic0);
  const std::size_t half = params.size();
  {
    std::vector<double> p1 = flatten(agent.critic1);
    params.insert(params.end(), p1.begin(), p1.end());
  }
  std::vector<double> grad = std::move(grad0);
  grad.insert(grad.end(), grad1.begin(), grad1.end());

  adam_step(params, grad, agent.critic_opt, hypers.learning_rate);

  agent.critic0 = unflatten(agent.critic0.spec,
                            std::span<const double>(params).subspan(0, half));
  agent.critic1 = unflatten(agent.critic1.spec,
                            std::span<const double>(params).subspan(half));
  agent.update_count += 1;
  return {loss0, loss1};
}

double actor_update(Td3Agent& agent, std::span<const Transition> batch,
                    const Td3Hypers& hypers) {
  if (batch.empty()) throw std::invalid_argument("td3: empty batch");
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  const std::size_t state_dim = batch.front().state.size();

  std::vector<double> grad(
      static_cast<std::size_t>(agent.actor.spec.param_count()), 0.0);
  double loss = 0.0;
  for (const Transition& t : batch) {
    const ForwardTrace actor_trace = forward_cached(agent.actor, t.state);
    const std::vector<double>& action = trace_output(actor_trace);
    const std::vector<double> in = concat_state_action(t.state, action);
    const ForwardTrace critic_trace = forward_cached(agent.critic0, in);
    loss -= trace_output(critic_trace)[0] * inv_b;

    // d(-mean Q)/d action, then chain through the actor.
    BackwardResult cback =
        backward(agent.critic0, critic_trace, std::vector<double>{-inv_b});
    const std::span<const double> dq_da =
        std::span<const double>(cback.input_grad).subspan(state_dim);
    BackwardResult aback = backward(agent.actor, actor_trace, dq_da);
    for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += aback.param_grad[i];
  }

  std::vector<double> params = flatten(agent.actor);
  adam_step(params, grad, agent.actor_opt, hypers.learning_rate);
  agent.actor = unflatten(agent.actor.spec, params);
  return loss;
}

void soft_update(Mlp& target, const Mlp& online, double tau) {
  if (target.spec != online.spec) {
    throw std::invalid_argument("soft_update: spec mismatch");
  }
  for (std::size_t l = 0; l < target.weights.size(); ++l) {
    for (std::size_t i = 0; i < target.weights[l].size(); ++i) {
      target.weights[l][i] =
          tau * online.weights[l][i] + (1.0 - tau) * target.weights[l][i];
    }
    for (std::size_t i = 0; i < target.biases[l].size(); ++i) {
      target.biases[l][i] =
          tau * online.biases[l][i] + (1.0 - tau) * target.biases[l][i];
    }
  }
}

Td3StepInfo td3_update(Td3Agent& agent, std::span<const Transition> batch,
                       const Td3Hypers& hypers, Rng& rng) {
  const std::vector<double> targets = compute_targets(agent, batch, hypers, rng);
  Td3StepInfo info;
  std::tie(info.critic_loss0, info.critic_loss1) =
      critic_update(agent, batch, targets, hypers);
  if (agent.update_count % hypers.policy_delay == 0) {
    info.actor_loss = actor_update(agent, batch, hypers);
    info.actor_updated = true;
    soft_update(agent.target_actor, agent.actor, hypers.tau);
    soft_update(agent.target_critic0, agent.critic0, hypers.tau);
    soft_update(agent.target_critic1, agent.critic1, hypers.tau);
  }
  return info;
}

}  // namespace estd3
