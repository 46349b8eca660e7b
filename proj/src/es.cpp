#include "estd3/es.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace estd3 {

OffspringSet::OffspringSet(std::vector<double> mu, double sigma,
                           std::vector<std::vector<double>> noises)
    : mu_(std::move(mu)), sigma_(sigma), noises_(std::move(noises)) {
  fitnesses.assign(2 * noises_.size(),
                   std::numeric_limits<double>::quiet_NaN());
}

std::vector<double> OffspringSet::offspring(std::size_t j) const {
  const double sign = (j % 2 == 0) ? 1.0 : -1.0;
  const std::vector<double>& noise = noises_.at(j / 2);
  std::vector<double> out(mu_.size());
  for (std::size_t k = 0; k < mu_.size(); ++k) {
    out[k] = mu_[k] + sign * (sigma_ * noise[k]);
  }
  return out;
}

std::vector<double> OffspringSet::offset(std::size_t j) const {
  const double sign = (j % 2 == 0) ? 1.0 : -1.0;
  const std::vector<double>& noise = noises_.at(j / 2);
  std::vector<double> out(mu_.size());
  for (std::size_t k = 0; k < mu_.size(); ++k) {
    out[k] = sign * (sigma_ * noise[k]);
  }
  return out;
}

OffspringSet sample_offspring(const SearchDistribution& dist, std::size_t n,
                              Rng& rng) {
  if (n < 1) throw std::invalid_argument("es: offspring count must be >= 1");
  if (!(dist.sigma > 0.0)) throw std::invalid_argument("es: sigma must be positive");
  std::vector<std::vector<double>> noises(n);
  for (std::size_t i = 0; i < n; ++i) {
    noises[i].resize(dist.mu.size());
    for (double& v : noises[i]) v = rng.normal();
  }
  return OffspringSet(dist.mu, dist.sigma, std::move(noises));
}

std::vector<double> shape_fitness(std::span<const double> raw) {
  const std::size_t m = raw.size();
  if (m < 2) throw std::invalid_argument("es: need at least two fitnesses to rank");

  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (raw[a] != raw[b]) return raw[a] < raw[b];
    return a < b;
  });

  std::vector<double> weights(m);
  std::size_t i = 0;
  while (i < m) {
    std::size_t j = i;
    while (j + 1 < m && raw[order[j + 1]] == raw[order[i]]) ++j;
    const double avg_rank = 0.5 * (static_cast<double>(i) + static_cast<double>(j));
    const double w = avg_rank / static_cast<double>(m - 1) - 0.5;
    for (std::size_t k = i; k <= j; ++k) weights[order[k]] = w;
    i = j + 1;
  }
  return weights;
}

void es_update(SearchDistribution& dist, const OffspringSet& set,
               bool rank_shaping) {
  const std::size_t m = set.size();
  if (set.fitnesses.size() != m) {
    throw std::domain_error("es: fitness count does not match offspring count");
  }
  for (double f : set.fitnesses) {
    if (!std::isfinite(f)) throw std::domain_error("es: non-finite fitness");
  }

  const std::vector<double> w =
      rank_shaping ? shape_fitness(set.fitnesses) : set.fitnesses;

  std::vector<double> acc(dist.mu.size(), 0.0);
  for (std::size_t j = 0; j < m; ++j) {  // fixed index order
    const double sign = (j % 2 == 0) ? 1.0 : -1.0;
    const std::vector<double>& noise = set.noises()[j / 2];
    const double wj = w[j] * sign;
    for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += wj * noise[k];
  }

  const double scale =
      dist.learning_rate / (static_cast<double>(m) * set.sigma());
  for (std::size_t k = 0; k < dist.mu.size(); ++k) {
    dist.mu[k] += scale * acc[k];
  }
}

namespace {

EvalResult eval_one(const OffspringSet& set, std::size_t j,
                    const MlpSpec& actor_spec, const EnvFactory& factory,
                    std::uint64_t env_seed) {
  const std::vector<double> params = set.offspring(j);
  const Mlp net = unflatten(actor_spec, params);
  std::unique_ptr<Env> env = factory();
  return evaluate([&net](std::span<const double> obs) { return net.forward(obs); },
                  *env, env_seed);
}

}  // namespace

EvaluatedOffspring evaluate_offspring_serial(const OffspringSet& set,
                                             const MlpSpec& actor_spec,
                                             const EnvFactory& factory,
                                             std::uint64_t env_seed) {
  const std::size_t m = set.size();
  EvaluatedOffspring out;
  out.fitnesses.resize(m);
  out.trajectories.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    EvalResult r = eval_one(set, j, actor_spec, factory, env_seed);
    out.fitnesses[j] = r.fitness;
    out.trajectories[j] = std::move(r.trajectory);
  }
  return out;
}

EvaluatedOffspring evaluate_offspring_parallel(const OffspringSet& set,
                                               const MlpSpec& actor_spec,
                                               const EnvFactory& factory,
                                               std::uint64_t env_seed) {
  const std::size_t m = set.size();
  EvaluatedOffspring out;
  out.fitnesses.resize(m);
  out.trajectories.resize(m);
  // Rollouts are independent; slots are indexed, so completion order cannot
  // change the result.
#pragma omp parallel for schedule(dynamic)
  for (long j = 0; j < static_cast<long>(m); ++j) {
    EvalResult r = eval_one(set, static_cast<std::size_t>(j), actor_spec,
                            factory, env_seed);
    out.fitnesses[j] = r.fitness;
    out.trajectories[j] = std::move(r.trajectory);
  }
  return out;
}

EvaluatedOffspring evaluate_offspring(const OffspringSet& set,
                                      const MlpSpec& actor_spec,
                                      const EnvFactory& factory,
                                      std::uint64_t env_seed, bool parallel) {
  return parallel
             ? evaluate_offspring_parallel(set, actor_spec, factory, env_seed)
             : evaluate_offspring_serial(set, actor_spec, factory, env_seed);
}

Policy make_policy(const MlpSpec& actor_spec, std::span<const double> params) {
  Mlp net = unflatten(actor_spec, params);
  return [net = std::move(net)](std::span<const double> obs) {
    return net.forward(obs);
  };
}

double evaluate_mean(const SearchDistribution& dist, const MlpSpec& actor_spec,
                     Env& env, std::uint64_t seed) {
  return evaluate(make_policy(actor_spec, dist.mu), env, seed).fitness;
}

}  // namespace estd3
