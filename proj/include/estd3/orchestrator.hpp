#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "estd3/env.hpp"
#include "estd3/es.hpp"
#include "estd3/mlp.hpp"
#include "estd3/replay.hpp"
#include "estd3/td3.hpp"

namespace estd3 {

/// Everything one training run needs. Defaults are desk scale (minutes, not
/// GPU-days); the published large-scale settings are one config away.
struct RunConfig {
  std::string env_name = "pointmass2d";
  int iterations = 10;
  long td3_frames_per_iter = 5000;   // M
  int es_generations_per_iter = 10;  // g

  int es_offspring = 10;             // n noise vectors, 2n offspring
  double es_sigma = 0.005;
  double es_learning_rate = 0.001;
  bool es_rank_shaping = true;
  bool es_parallel_eval = true;

  Td3Hypers td3;
  long warmup_transitions = 1000;    // K: min stored transitions before updates

  std::size_t buffer_capacity = 1000000;
  SampleRatio ratio;
  double good_fraction = 0.9;
  ThresholdTracker::Mode threshold_mode = ThresholdTracker::Mode::Literal;
  bool route_all_to_noisy = false;   // single-buffer ablation

  int overwrite_eval_episodes = 5;
  bool overwrite_enabled = true;

  std::vector<int> hidden_sizes = {64, 64};
  std::uint64_t seed = 0;

  void validate() const;
};

struct IterationReport {
  int iteration = 0;
  double es_eval = 0.0;
  double td3_eval = 0.0;
  bool overwrite_applied = false;
  double threshold = 0.0;
  std::size_t good_size = 0;
  std::size_t bad_size = 0;
  std::size_t noisy_size = 0;
  long cumulative_frames = 0;
  long cumulative_es_evals = 0;
};

/// Optional fine-grained observer for the verbose trace.
class TraceSink {
 public:
  virtual ~TraceSink() = default;
  virtual void on_es_generation(int iteration, int generation,
                                double mean_eval, double threshold) = 0;
  virtual void on_td3_frames(int iteration, long frames_into_phase,
                             double last_episode_return, double threshold) = 0;
};

struct CompareResult {
  double td3_score = 0.0;
  double es_score = 0.0;
  bool overwrote = false;
};

struct RunResult {
  std::vector<IterationReport> reports;
  Mlp final_actor;
  Mlp final_mean;
};

/// The outer loop: per iteration one M-frame TD3 phase, one g-generation ES
/// phase, then the averaged-score overwrite check. Single logical thread of
/// control; the only parallelism is the offspring-evaluation fan-out.
class Trainer {
 public:
  explicit Trainer(const RunConfig& config);

  /// M environment frames of exploratory TD3. Every transition lands in the
  /// noisy compartment; one TD3 update per step once the buffer is ready;
  /// completed-episode returns feed the threshold. The last episode may be
  /// cut by the frame budget and is then abandoned without a threshold
  /// update.
  void td3_phase();

  /// g generations: sample antithetic offspring, evaluate them all, route
  /// every trajectory (threshold rule), update the mean, then evaluate the
  /// new mean once (threshold only, trajectory discarded).
  void es_phase();

  /// Averages overwrite_eval_episodes deterministic evaluations per side and
  /// copies the actor's parameters into the ES mean on a strict win.
  CompareResult compare_and_overwrite();

  IterationReport run_iteration();
  RunResult run();

  const Td3Agent& agent() const { return agent_; }
  Td3Agent& agent() { return agent_; }
  const SearchDistribution& distribution() const { return dist_; }
  SearchDistribution& distribution() { return dist_; }
  const MultiBuffer& buffer() const { return buffer_; }
  const ThresholdTracker& tracker() const { return tracker_; }
  ThresholdTracker& tracker() { return tracker_; }
  const MlpSpec& actor_spec() const { return actor_spec_; }
  long cumulative_frames() const { return cumulative_frames_; }
  long cumulative_es_evals() const { return cumulative_es_evals_; }
  int iterations_done() const { return iterations_done_; }
  Mlp mean_as_network() const { return unflatten(actor_spec_, dist_.mu); }

  TraceSink* trace = nullptr;

 private:
  std::uint64_t next_env_seed() { return derive_seed(env_seed_base_, env_seed_counter_++); }

  RunConfig cfg_;
  std::unique_ptr<Env> env_;
  MlpSpec actor_spec_;
  Td3Agent agent_;
  SearchDistribution dist_;
  MultiBuffer buffer_;
  ThresholdTracker tracker_;
  Rng rng_es_;
  Rng rng_explore_;
  Rng rng_target_;
  Rng rng_batch_;
  std::uint64_t env_seed_base_;
  std::uint64_t env_seed_counter_ = 0;
  long cumulative_frames_ = 0;
  long cumulative_es_evals_ = 0;
  int iterations_done_ = 0;
};

}  // namespace estd3
