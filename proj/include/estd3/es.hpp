#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "estd3/env.hpp"
#include "estd3/mlp.hpp"
#include "estd3/rng.hpp"

namespace estd3 {

/// Isotropic Gaussian search distribution over flat parameter vectors. Only
/// the mean is ever updated; sigma stays fixed for the whole run.
struct SearchDistribution {
  std::vector<double> mu;
  double sigma = 0.005;
  double learning_rate = 0.001;
};

/// One generation of antithetic offspring around a snapshot of the mean.
/// Offspring j is mu + sign(j) * sigma * noises[j/2] with sign +1 for even j
/// and -1 for odd j; the scaled perturbation is computed once per pair, so
/// offset(2i) + offset(2i+1) cancels exactly.
class OffspringSet {
 public:
  OffspringSet(std::vector<double> mu, double sigma,
               std::vector<std::vector<double>> noises);

  std::size_t pair_count() const { return noises_.size(); }
  std::size_t size() const { return 2 * noises_.size(); }

  /// Materialized parameter vector of offspring j.
  std::vector<double> offspring(std::size_t j) const;

  /// offspring(j) - mu, exact by construction: +-(sigma * N_{j/2}).
  std::vector<double> offset(std::size_t j) const;

  const std::vector<double>& mu() const { return mu_; }
  double sigma() const { return sigma_; }
  const std::vector<std::vector<double>>& noises() const { return noises_; }

  /// Raw episodic fitnesses, one per offspring, filled after evaluation.
  std::vector<double> fitnesses;

 private:
  std::vector<double> mu_;
  double sigma_;
  std::vector<std::vector<double>> noises_;
};

/// n standard-normal noise vectors, 2n antithetic offspring.
OffspringSet sample_offspring(const SearchDistribution& dist, std::size_t n,
                              Rng& rng);

/// Centered-rank weights: ascending ranks mapped to k/(m-1) - 1/2. Exactly
/// tied fitnesses share the average of their rank positions, so the weights
/// are invariant under any strictly increasing transform of the fitnesses
/// and tied antithetic pairs cancel in the update.
std::vector<double> shape_fitness(std::span<const double> raw);

/// mu += lr / (2n * sigma) * sum_j w_j * (+-N_{j/2}), reduced in offspring
/// index order. With rank_shaping off, w is the raw fitness vector. sigma is
/// never modified. Throws std::domain_error on missing/non-finite fitnesses.
void es_update(SearchDistribution& dist, const OffspringSet& set,
               bool rank_shaping = true);

struct EvaluatedOffspring {
  std::vector<double> fitnesses;     // index-aligned with the offspring set
  std::vector<Trajectory> trajectories;
};

/// Rolls every offspring through a fresh environment instance. All offspring
/// of one generation share the same environment seed. Results are stored by
/// offspring index, so the parallel version is bit-identical to the serial
/// one regardless of scheduling.
EvaluatedOffspring evaluate_offspring_serial(const OffspringSet& set,
                                             const MlpSpec& actor_spec,
                                             const EnvFactory& factory,
                                             std::uint64_t env_seed);
EvaluatedOffspring evaluate_offspring_parallel(const OffspringSet& set,
                                               const MlpSpec& actor_spec,
                                               const EnvFactory& factory,
                                               std::uint64_t env_seed);
EvaluatedOffspring evaluate_offspring(const OffspringSet& set,
                                      const MlpSpec& actor_spec,
                                      const EnvFactory& factory,
                                      std::uint64_t env_seed, bool parallel);

/// Wraps flat parameters as a deterministic policy net.
Policy make_policy(const MlpSpec& actor_spec, std::span<const double> params);

/// Fitness of the deterministic policy defined by the current mean.
double evaluate_mean(const SearchDistribution& dist, const MlpSpec& actor_spec,
                     Env& env, std::uint64_t seed);

}  // namespace estd3
