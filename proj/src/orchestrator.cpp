#include "estd3/orchestrator.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

namespace estd3 {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("config: " + what);
}

// Seed streams carved out of the master seed.
enum SeedStream : std::uint64_t {
  kAgentInit = 1,
  kMeanInit = 2,
  kEsNoise = 3,
  kExploreNoise = 4,
  kTargetNoise = 5,
  kBatchSampling = 6,
  kEnvSeeds = 7,
};

}  // namespace

void RunConfig::validate() const {
  require(!env_name.empty(), "env must be set");
  require(iterations >= 0, "iterations must be >= 0");
  require(td3_frames_per_iter >= 0, "td3_frames_per_iter must be >= 0");
  require(es_generations_per_iter >= 0, "es_generations_per_iter must be >= 0");
  require(es_offspring >= 1, "es.offspring must be >= 1");
  require(es_sigma > 0.0, "es.sigma must be > 0");
  require(es_learning_rate > 0.0, "es.learning_rate must be > 0");
  require(td3.gamma >= 0.0 && td3.gamma <= 1.0, "td3.gamma must be in [0, 1]");
  require(td3.tau > 0.0 && td3.tau <= 1.0, "td3.tau must be in (0, 1]");
  require(td3.policy_delay >= 1, "td3.policy_delay must be >= 1");
  require(td3.explore_noise_std >= 0.0, "td3.explore_noise_std must be >= 0");
  require(td3.target_noise_std >= 0.0, "td3.target_noise_std must be >= 0");
  require(td3.target_noise_clip >= 0.0, "td3.target_noise_clip must be >= 0");
  require(td3.batch_size >= 1, "td3.batch_size must be >= 1");
  require(td3.learning_rate > 0.0, "td3.learning_rate must be > 0");
  require(warmup_transitions >= 0, "td3.warmup_transitions must be >= 0");
  require(buffer_capacity >= 1, "buffer.capacity must be >= 1");
  ratio.validate();
  require(good_fraction > 0.0 && good_fraction <= 1.0,
          "buffer.good_fraction must be in (0, 1]");
  require(overwrite_eval_episodes >= 1, "overwrite_eval_episodes must be >= 1");
  require(!hidden_sizes.empty(), "network.hidden_sizes must not be empty");
  for (int h : hidden_sizes) require(h >= 1, "network.hidden_sizes entries must be >= 1");
}

Trainer::Trainer(const RunConfig& config)
    : cfg_(config),
      env_(make_env(config.env_name)),
      agent_(make_td3_agent(env_->spec().obs_dim, env_->spec().act_dim,
                            env_->spec().action_bound, config.hidden_sizes,
                            derive_seed(config.seed, kAgentInit))),
      buffer_(config.buffer_capacity, config.ratio, static_cast<std::size_t>(config.warmup_transitions)),
      rng_es_(derive_seed(config.seed, kEsNoise)),
      rng_explore_(derive_seed(config.seed, kExploreNoise)),
      rng_target_(derive_seed(config.seed, kTargetNoise)),
      rng_batch_(derive_seed(config.seed, kBatchSampling)),
      env_seed_base_(derive_seed(config.seed, kEnvSeeds)) {
  cfg_.validate();
  actor_spec_ = agent_.actor.spec;
  dist_.mu = flatten(mlp_init(actor_spec_, derive_seed(config.seed, kMeanInit)));
  dist_.sigma = cfg_.es_sigma;
  dist_.learning_rate = cfg_.es_learning_rate;
  tracker_.good_fraction = cfg_.good_fraction;
  tracker_.mode = cfg_.threshold_mode;
}

void Trainer::td3_phase() {
  const long budget = cfg_.td3_frames_per_iter;
  const std::size_t batch_size = static_cast<std::size_t>(cfg_.td3.batch_size);
  long frames_done = 0;
  double last_episode_return = std::numeric_limits<double>::quiet_NaN();
  while (frames_done < budget) {
    std::vector<double> obs = env_->reset(next_env_seed());
    double ep_reward = 0.0;
    bool done = false;
    while (!done && frames_done < budget) {
      std::vector<double> action =
          select_action(agent_, obs, cfg_.td3, rng_explore_);
      StepResult res = env_->step(action);
      Transition t;
      t.state = obs;
      t.action = std::move(action);
      t.next_state = res.observation;
      t.reward = res.reward;
      t.terminated = res.terminated && !res.truncated;
      buffer_.push_noisy(std::move(t));
      ep_reward += res.reward;
      ++frames_done;
      ++cumulative_frames_;
      if (buffer_.ready(batch_size)) {
        const std::vector<Transition> batch =
            buffer_.sample_batch(batch_size, rng_batch_);
        td3_update(agent_, batch, cfg_.td3, rng_target_);
      }
      obs = std::move(res.observation);
      done = res.terminated;
      if (trace && frames_done % 1000 == 0) {
        trace->on_td3_frames(iterations_done_ + 1, frames_done,
                             last_episode_return, tracker_.threshold);
      }
    }
    if (done) {
      tracker_.update(ep_reward);
      last_episode_return = ep_reward;
    }
    // A budget-cut episode is abandoned: its partial return is not an
    // episodic fitness and must not move the threshold.
  }
}

void Trainer::es_phase() {
  EnvFactory factory = [name = cfg_.env_name]() { return make_env(name); };
  for (int gen = 0; gen < cfg_.es_generations_per_iter; ++gen) {
    OffspringSet set =
        sample_offspring(dist_, static_cast<std::size_t>(cfg_.es_offspring), rng_es_);
    const std::uint64_t gen_seed = next_env_seed();  // shared by the generation
    EvaluatedOffspring eval = evaluate_offspring(set, actor_spec_, factory,
                                                 gen_seed, cfg_.es_parallel_eval);
    cumulative_es_evals_ += static_cast<long>(set.size());

    for (std::size_t j = 0; j < set.size(); ++j) {  // offspring-index order
      const Trajectory& traj = eval.trajectories[j];
      if (cfg_.route_all_to_noisy) {
        for (const Transition& tr : traj.transitions) buffer_.push_noisy(tr);
        tracker_.update(traj.fitness);
      } else {
        buffer_.route_trajectory(traj, tracker_);
      }
    }

    set.fitnesses = eval.fitnesses;
    es_update(dist_, set, cfg_.es_rank_shaping);

    // Evaluate(mu) once per generation: the threshold sees it, the
    // trajectory is discarded.
    const double mean_fit =
        evaluate_mean(dist_, actor_spec_, *env_, next_env_seed());
    tracker_.update(mean_fit);
    if (trace) {
      trace->on_es_generation(iterations_done_ + 1, gen, mean_fit,
                              tracker_.threshold);
    }
  }
}

CompareResult Trainer::compare_and_overwrite() {
  const int episodes = cfg_.overwrite_eval_episodes;
  const Policy actor_policy = [this](std::span<const double> obs) {
    return agent_.actor.forward(obs);
  };
  double td3_sum = 0.0;
  for (int e = 0; e < episodes; ++e) {
    td3_sum += evaluate(actor_policy, *env_, next_env_seed()).fitness;
  }
  double es_sum = 0.0;
  for (int e = 0; e < episodes; ++e) {
    es_sum += evaluate_mean(dist_, actor_spec_, *env_, next_env_seed());
  }
  CompareResult result;
  result.td3_score = td3_sum / episodes;
  result.es_score = es_sum / episodes;
  if (cfg_.overwrite_enabled && result.td3_score > result.es_score) {
    dist_.mu = flatten(agent_.actor);  // exact copy, strict win only
    result.overwrote = true;
  }
  return result;
}

IterationReport Trainer::run_iteration() {
  td3_phase();
  es_phase();
  const CompareResult cmp = compare_and_overwrite();
  ++iterations_done_;
  IterationReport rep;
  rep.iteration = iterations_done_;
  rep.es_eval = cmp.es_score;
  rep.td3_eval = cmp.td3_score;
  rep.overwrite_applied = cmp.overwrote;
  rep.threshold = tracker_.threshold;
  rep.good_size = buffer_.good_size();
  rep.bad_size = buffer_.bad_size();
  rep.noisy_size = buffer_.noisy_size();
  rep.cumulative_frames = cumulative_frames_;
  rep.cumulative_es_evals = cumulative_es_evals_;
  return rep;
}

RunResult Trainer::run() {
  RunResult result;
  for (int it = 0; it < cfg_.iterations; ++it) {
    result.reports.push_back(run_iteration());
  }
  result.final_actor = agent_.actor;
  result.final_mean = mean_as_network();
  return result;
}

}  // namespace estd3
