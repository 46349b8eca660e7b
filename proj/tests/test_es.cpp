#include <doctest.h>

#include <cmath>

#include "estd3/es.hpp"

using namespace estd3;

namespace {

SearchDistribution small_dist(std::size_t dim, double sigma, double lr,
                              std::uint64_t seed) {
  SearchDistribution d;
  d.sigma = sigma;
  d.learning_rate = lr;
  Rng rng(seed);
  d.mu.resize(dim);
  for (double& v : d.mu) v = rng.uniform(-1, 1);
  return d;
}

}  // namespace

TEST_CASE("offspring sampling") {
  SearchDistribution dist = small_dist(6, 0.1, 0.01, 3);
  Rng rng(42);
  OffspringSet set = sample_offspring(dist, 4, rng);

  SUBCASE("n noise vectors make 2n offspring") {
    CHECK(set.pair_count() == 4);
    CHECK(set.size() == 8);
    Rng rng60(1);
    CHECK(sample_offspring(dist, 60, rng60).size() == 120);
  }

  SUBCASE("antithetic offsets cancel exactly, component by component") {
    for (std::size_t i = 0; i < set.pair_count(); ++i) {
      const auto plus = set.offset(2 * i);
      const auto minus = set.offset(2 * i + 1);
      for (std::size_t k = 0; k < plus.size(); ++k) {
        CHECK(plus[k] + minus[k] == 0.0);
      }
    }
  }

  SUBCASE("vanishing sigma collapses all offspring onto the mean") {
    SearchDistribution tiny = dist;
    tiny.sigma = 1e-300;
    Rng r(7);
    OffspringSet s = sample_offspring(tiny, 3, r);
    for (std::size_t j = 0; j < s.size(); ++j) {
      CHECK(s.offspring(j) == tiny.mu);
    }
  }

  SUBCASE("same rng seed reproduces the generation") {
    Rng a(5), b(5);
    OffspringSet sa = sample_offspring(dist, 3, a);
    OffspringSet sb = sample_offspring(dist, 3, b);
    for (std::size_t j = 0; j < sa.size(); ++j) {
      CHECK(sa.offspring(j) == sb.offspring(j));
    }
  }
}

TEST_CASE("fitness shaping") {
  SUBCASE("centered ranks of (3, 1, 2)") {
    const auto w = shape_fitness(std::vector<double>{3, 1, 2});
    CHECK(w == std::vector<double>{0.5, -0.5, 0.0});
  }

  SUBCASE("all-equal fitnesses produce the fixed centered weights, sum 0") {
    const auto w = shape_fitness(std::vector<double>(6, 4.2));
    double sum = 0.0;
    for (double v : w) sum += v;
    CHECK(sum == 0.0);
    // Exact ties share one averaged rank, i.e. equal (zero) weight.
    for (double v : w) CHECK(v == 0.0);
  }

  SUBCASE("weights are invariant under strictly increasing transforms") {
    Rng rng(9);
    std::vector<double> raw(10);
    for (double& v : raw) v = rng.uniform(-5, 5);
    raw[3] = raw[7];  // keep a tie in play
    const auto base = shape_fitness(raw);

    std::vector<double> affine(raw.size()), cubed(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
      affine[i] = 2.0 * raw[i] + 7.0;
      cubed[i] = raw[i] * raw[i] * raw[i];
    }
    CHECK(shape_fitness(affine) == base);
    CHECK(shape_fitness(cubed) == base);
  }

  SUBCASE("fewer than two fitnesses cannot be ranked") {
    CHECK_THROWS_AS(shape_fitness(std::vector<double>{1.0}),
                    std::invalid_argument);
  }
}

TEST_CASE("mean update") {
  SUBCASE("all-equal fitnesses leave the mean bitwise unchanged") {
    SearchDistribution dist = small_dist(8, 0.05, 0.1, 11);
    const std::vector<double> before = dist.mu;
    Rng rng(2);
    OffspringSet set = sample_offspring(dist, 5, rng);
    set.fitnesses.assign(set.size(), 3.14);
    es_update(dist, set);
    CHECK(dist.mu == before);
  }

  SUBCASE("pairwise-tied fitnesses cancel antithetically") {
    SearchDistribution dist = small_dist(8, 0.05, 0.1, 13);
    const std::vector<double> before = dist.mu;
    Rng rng(3);
    OffspringSet set = sample_offspring(dist, 5, rng);
    Rng fit_rng(4);
    for (std::size_t i = 0; i < set.pair_count(); ++i) {
      const double f = fit_rng.uniform(-10, 10);
      set.fitnesses[2 * i] = f;
      set.fitnesses[2 * i + 1] = f;
    }
    es_update(dist, set);
    CHECK(dist.mu == before);
  }

  SUBCASE("one favourable pair in 1-D moves the mean by lr/(2 sigma)") {
    SearchDistribution dist;
    dist.mu = {0.25};
    dist.sigma = 0.05;
    dist.learning_rate = 0.001;
    OffspringSet set({0.25}, 0.05, {{1.0}});
    set.fitnesses = {1.0, -1.0};  // F+ > F-, weights (0.5, -0.5)
    es_update(dist, set);
    CHECK(dist.mu[0] == 0.25 + dist.learning_rate / (2.0 * dist.sigma) * 1.0);
  }

  SUBCASE("any strictly increasing fitness transform gives a bit-identical mean") {
    SearchDistribution a = small_dist(12, 0.1, 0.02, 21);
    SearchDistribution b = a;
    Rng rng(6);
    OffspringSet set = sample_offspring(a, 6, rng);
    Rng fit_rng(8);
    for (double& f : set.fitnesses) f = fit_rng.uniform(-100, 100);

    OffspringSet transformed = set;
    for (double& f : transformed.fitnesses) f = 2.0 * f + 7.0;

    es_update(a, set);
    es_update(b, transformed);
    CHECK(a.mu == b.mu);
  }

  SUBCASE("sigma is never modified") {
    SearchDistribution dist = small_dist(4, 0.07, 0.05, 31);
    Rng rng(10);
    OffspringSet set = sample_offspring(dist, 3, rng);
    Rng fit_rng(11);
    for (double& f : set.fitnesses) f = fit_rng.normal();
    es_update(dist, set);
    CHECK(dist.sigma == 0.07);
  }

  SUBCASE("missing or non-finite fitnesses are rejected") {
    SearchDistribution dist = small_dist(4, 0.05, 0.01, 41);
    Rng rng(12);
    OffspringSet set = sample_offspring(dist, 2, rng);
    CHECK_THROWS_AS(es_update(dist, set), std::domain_error);  // still NaN
  }

  SUBCASE("descends the 10-D sphere to the optimum") {
    // The optimizer is its own convergence check against a known optimum.
    const std::size_t dim = 10;
    Rng setup(123);
    std::vector<double> target(dim);
    for (double& v : target) v = setup.uniform(-1, 1);

    SearchDistribution dist;
    dist.mu.assign(dim, 0.0);
    dist.sigma = 0.05;
    dist.learning_rate = 0.05;

    auto sphere = [&target](const std::vector<double>& x) {
      double s = 0.0;
      for (std::size_t k = 0; k < x.size(); ++k) {
        s += (x[k] - target[k]) * (x[k] - target[k]);
      }
      return -s;
    };

    Rng rng(77);
    double dist_to_target = 1e9;
    int generations = 0;
    for (; generations < 300 && dist_to_target >= 0.1; ++generations) {
      OffspringSet set = sample_offspring(dist, 30, rng);
      for (std::size_t j = 0; j < set.size(); ++j) {
        set.fitnesses[j] = sphere(set.offspring(j));
      }
      es_update(dist, set);
      double sq = 0.0;
      for (std::size_t k = 0; k < dim; ++k) {
        sq += (dist.mu[k] - target[k]) * (dist.mu[k] - target[k]);
      }
      dist_to_target = std::sqrt(sq);
    }
    CHECK(dist_to_target < 0.1);
    CHECK(generations <= 300);
  }
}

TEST_CASE("offspring evaluation") {
  MlpSpec actor_spec{.layer_sizes = {3, 8, 1},
                     .output = OutputActivation::ScaledTanh,
                     .output_bound = 2.0};
  SearchDistribution dist;
  dist.mu = flatten(mlp_init(actor_spec, 55));
  dist.sigma = 0.2;
  EnvFactory factory = [] { return make_env("pendulum"); };

  Rng rng(14);
  OffspringSet set = sample_offspring(dist, 5, rng);

  SUBCASE("serial and parallel evaluation agree bitwise") {
    EvaluatedOffspring serial =
        evaluate_offspring_serial(set, actor_spec, factory, 9);
    EvaluatedOffspring parallel =
        evaluate_offspring_parallel(set, actor_spec, factory, 9);
    CHECK(serial.fitnesses == parallel.fitnesses);
    REQUIRE(serial.trajectories.size() == parallel.trajectories.size());
    for (std::size_t j = 0; j < serial.trajectories.size(); ++j) {
      const auto& a = serial.trajectories[j];
      const auto& b = parallel.trajectories[j];
      CHECK(a.fitness == b.fitness);
      REQUIRE(a.transitions.size() == b.transitions.size());
      for (std::size_t k = 0; k < a.transitions.size(); ++k) {
        CHECK(a.transitions[k].state == b.transitions[k].state);
        CHECK(a.transitions[k].action == b.transitions[k].action);
        CHECK(a.transitions[k].reward == b.transitions[k].reward);
      }
    }
  }

  SUBCASE("fitnesses line up with trajectories") {
    EvaluatedOffspring ev = evaluate_offspring(set, actor_spec, factory, 9, false);
    REQUIRE(ev.fitnesses.size() == set.size());
    for (std::size_t j = 0; j < ev.fitnesses.size(); ++j) {
      CHECK(ev.fitnesses[j] == ev.trajectories[j].fitness);
    }
  }
}

TEST_CASE("mean evaluation") {
  MlpSpec actor_spec{.layer_sizes = {4, 6, 2},
                     .output = OutputActivation::ScaledTanh,
                     .output_bound = 1.0};

  SUBCASE("the zero mean acts as the zero policy") {
    SearchDistribution dist;
    dist.mu.assign(actor_spec.param_count(), 0.0);
    auto env = make_env("pointmass2d");
    const double f = evaluate_mean(dist, actor_spec, *env, 0);
    CHECK(f == doctest::Approx(-100.0 * std::sqrt(2.0)).epsilon(1e-12));
  }

  SUBCASE("repeat evaluations are identical") {
    SearchDistribution dist;
    dist.mu = flatten(mlp_init(actor_spec, 91));
    auto env = make_env("pointmass2d");
    CHECK(evaluate_mean(dist, actor_spec, *env, 3) ==
          evaluate_mean(dist, actor_spec, *env, 3));
  }
}
