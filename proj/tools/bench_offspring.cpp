// Benchmark: serial reference vs OpenMP offspring evaluation. The two paths
// must agree bitwise; the table reports wall time and speedup.

#include <chrono>
#include <cstdio>
#include <iostream>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <CLI11.hpp>

#include "estd3/es.hpp"

using namespace estd3;

namespace {

double time_ms(const std::function<void()>& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  fn();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"offspring evaluation benchmark: serial vs OpenMP"};
  std::string env_name = "pendulum";
  int pairs = 30;
  int reps = 3;
  std::vector<int> hidden{64, 64};
  app.add_option("--env", env_name, "environment name");
  app.add_option("--pairs", pairs, "noise vectors per generation (n)");
  app.add_option("--reps", reps, "repetitions to time");
  app.add_option("--hidden", hidden, "hidden layer sizes")->delimiter(',');
  CLI11_PARSE(app, argc, argv);

  auto probe = make_env(env_name);
  MlpSpec actor_spec;
  actor_spec.layer_sizes.push_back(probe->spec().obs_dim);
  actor_spec.layer_sizes.insert(actor_spec.layer_sizes.end(), hidden.begin(),
                                hidden.end());
  actor_spec.layer_sizes.push_back(probe->spec().act_dim);
  actor_spec.output = OutputActivation::ScaledTanh;
  actor_spec.output_bound = probe->spec().action_bound;

  SearchDistribution dist;
  dist.mu = flatten(mlp_init(actor_spec, 42));
  dist.sigma = 0.1;
  EnvFactory factory = [&env_name] { return make_env(env_name); };

  Rng rng(7);
  OffspringSet set = sample_offspring(dist, static_cast<std::size_t>(pairs), rng);

#ifdef _OPENMP
  std::cout << "threads: " << omp_get_max_threads() << "\n";
#else
  std::cout << "threads: 1 (built without OpenMP)\n";
#endif
  std::cout << "env " << env_name << ", " << set.size() << " offspring, "
            << actor_spec.param_count() << " parameters each\n\n";
  std::printf("%-10s %12s\n", "path", "ms/gen");

  EvaluatedOffspring serial, parallel;
  double serial_ms = 0.0, parallel_ms = 0.0;
  for (int r = 0; r < reps; ++r) {
    serial_ms += time_ms([&] {
      serial = evaluate_offspring_serial(set, actor_spec, factory, 1);
    });
    parallel_ms += time_ms([&] {
      parallel = evaluate_offspring_parallel(set, actor_spec, factory, 1);
    });
  }
  serial_ms /= reps;
  parallel_ms /= reps;

  std::printf("%-10s %12.2f\n", "serial", serial_ms);
  std::printf("%-10s %12.2f\n", "openmp", parallel_ms);
  std::printf("speedup    %12.2fx\n", serial_ms / parallel_ms);

  if (serial.fitnesses != parallel.fitnesses) {
    std::cerr << "MISMATCH: serial and parallel fitnesses differ\n";
    return 1;
  }
  std::cout << "paths agree bitwise\n";
  return 0;
}
