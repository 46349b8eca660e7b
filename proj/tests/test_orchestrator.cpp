#include <doctest.h>

#include <cmath>

#include "estd3/orchestrator.hpp"

using namespace estd3;

namespace {

// Small enough to run in milliseconds, big enough to exercise everything.
RunConfig desk_config() {
  RunConfig cfg;
  cfg.env_name = "pointmass2d";
  cfg.iterations = 2;
  cfg.td3_frames_per_iter = 120;
  cfg.es_generations_per_iter = 1;
  cfg.es_offspring = 2;
  cfg.es_sigma = 0.05;
  cfg.td3.batch_size = 8;
  cfg.warmup_transitions = 20;
  cfg.hidden_sizes = {4};
  cfg.overwrite_eval_episodes = 2;
  cfg.seed = 5;
  return cfg;
}

bool reports_equal(const IterationReport& a, const IterationReport& b) {
  return a.iteration == b.iteration && a.es_eval == b.es_eval &&
         a.td3_eval == b.td3_eval &&
         a.overwrite_applied == b.overwrite_applied &&
         a.threshold == b.threshold && a.good_size == b.good_size &&
         a.bad_size == b.bad_size && a.noisy_size == b.noisy_size &&
         a.cumulative_frames == b.cumulative_frames &&
         a.cumulative_es_evals == b.cumulative_es_evals;
}

}  // namespace

TEST_CASE("td3 phase") {
  SUBCASE("a zero frame budget is a no-op") {
    RunConfig cfg = desk_config();
    cfg.td3_frames_per_iter = 0;
    Trainer t(cfg);
    const auto before = flatten(t.agent().actor);
    t.td3_phase();
    CHECK(t.cumulative_frames() == 0);
    CHECK(t.buffer().total_size() == 0);
    CHECK(flatten(t.agent().actor) == before);
  }

  SUBCASE("below the warmup floor transitions are stored but nothing trains") {
    RunConfig cfg = desk_config();
    cfg.td3_frames_per_iter = 15;
    cfg.warmup_transitions = 1000;
    Trainer t(cfg);
    t.td3_phase();
    CHECK(t.buffer().noisy_size() == 15);
    CHECK(t.agent().update_count == 0);
  }

  SUBCASE("with a full-mode ratio, TD3 cannot start before ES fills good/bad") {
    RunConfig cfg = desk_config();
    cfg.warmup_transitions = 0;
    Trainer t(cfg);
    t.td3_phase();
    CHECK(t.buffer().noisy_size() == 120);
    CHECK(t.agent().update_count == 0);  // good and bad still empty
  }

  SUBCASE("exact frame accounting, including budget-cut episodes") {
    RunConfig cfg = desk_config();
    cfg.td3_frames_per_iter = 130;  // cuts the second episode at frame 130
    Trainer t(cfg);
    t.td3_phase();
    CHECK(t.cumulative_frames() == 130);
    CHECK(t.buffer().noisy_size() == 130);
  }
}

TEST_CASE("es phase") {
  SUBCASE("one generation with one pair: 2 evaluations, routed, one update") {
    RunConfig cfg = desk_config();
    cfg.es_generations_per_iter = 1;
    cfg.es_offspring = 1;
    Trainer t(cfg);
    const auto mu_before = t.distribution().mu;
    t.es_phase();
    CHECK(t.cumulative_es_evals() == 2);
    // Both trajectories (100 transitions each on the point mass) landed in
    // good or bad, never in noisy.
    CHECK(t.buffer().good_size() + t.buffer().bad_size() == 200);
    CHECK(t.buffer().noisy_size() == 0);
    CHECK(t.distribution().mu != mu_before);
    CHECK(std::isfinite(t.tracker().threshold));
  }

  SUBCASE("an unreachable threshold routes every offspring to bad") {
    RunConfig cfg = desk_config();
    Trainer t(cfg);
    t.tracker().threshold = 1e9;
    t.es_phase();
    CHECK(t.buffer().good_size() == 0);
    CHECK(t.buffer().bad_size() > 0);
  }

  SUBCASE("sigma is untouched by a whole phase") {
    RunConfig cfg = desk_config();
    Trainer t(cfg);
    t.es_phase();
    CHECK(t.distribution().sigma == cfg.es_sigma);
  }
}

TEST_CASE("overwrite rule") {
  SUBCASE("identical policies tie and nothing happens") {
    RunConfig cfg = desk_config();
    Trainer t(cfg);
    t.distribution().mu = flatten(t.agent().actor);
    const CompareResult r = t.compare_and_overwrite();
    CHECK(r.td3_score == r.es_score);
    CHECK_FALSE(r.overwrote);
  }

  SUBCASE("a strict TD3 win copies the actor into the mean exactly") {
    RunConfig cfg = desk_config();
    Trainer t(cfg);
    // Rig the mean to a policy that runs away from the goal: output bias
    // hard negative on both action components.
    std::vector<double> awful(t.actor_spec().param_count(), 0.0);
    awful[awful.size() - 1] = -10.0;
    awful[awful.size() - 2] = -10.0;
    t.distribution().mu = awful;
    const CompareResult r = t.compare_and_overwrite();
    CHECK(r.td3_score > r.es_score);
    CHECK(r.overwrote);
    CHECK(t.distribution().mu == flatten(t.agent().actor));

    // After the overwrite the mean evaluates exactly like the actor.
    auto env = make_env(cfg.env_name);
    const double mean_fit =
        evaluate_mean(t.distribution(), t.actor_spec(), *env, 0);
    const double actor_fit =
        evaluate([&t](std::span<const double> obs) { return t.agent().actor.forward(obs); },
                 *env, 0)
            .fitness;
    CHECK(mean_fit == actor_fit);
  }

  SUBCASE("overwrites can be disabled") {
    RunConfig cfg = desk_config();
    cfg.overwrite_enabled = false;
    Trainer t(cfg);
    std::vector<double> awful(t.actor_spec().param_count(), 0.0);
    awful.back() = -10.0;
    t.distribution().mu = awful;
    const CompareResult r = t.compare_and_overwrite();
    CHECK(r.td3_score > r.es_score);
    CHECK_FALSE(r.overwrote);
    CHECK(t.distribution().mu == awful);
  }
}

TEST_CASE("full runs") {
  SUBCASE("zero iterations produce an empty report and valid checkpoints") {
    RunConfig cfg = desk_config();
    cfg.iterations = 0;
    Trainer t(cfg);
    const RunResult r = t.run();
    CHECK(r.reports.empty());
    CHECK(r.final_actor.spec == t.actor_spec());
    CHECK(flatten(r.final_mean).size() ==
          static_cast<std::size_t>(t.actor_spec().param_count()));
  }

  SUBCASE("identical config and seed reproduce every report field") {
    RunConfig cfg = desk_config();
    const RunResult a = Trainer(cfg).run();
    const RunResult b = Trainer(cfg).run();
    REQUIRE(a.reports.size() == b.reports.size());
    for (std::size_t i = 0; i < a.reports.size(); ++i) {
      CHECK(reports_equal(a.reports[i], b.reports[i]));
    }
    CHECK(flatten(a.final_actor) == flatten(b.final_actor));
    CHECK(flatten(a.final_mean) == flatten(b.final_mean));
  }

  SUBCASE("frame and evaluation accounting is exact") {
    RunConfig cfg = desk_config();
    cfg.iterations = 3;
    const RunResult r = Trainer(cfg).run();
    for (int k = 0; k < 3; ++k) {
      CHECK(r.reports[k].cumulative_frames == (k + 1) * cfg.td3_frames_per_iter);
      CHECK(r.reports[k].cumulative_es_evals ==
            (k + 1) * cfg.es_generations_per_iter * 2 * cfg.es_offspring);
      CHECK(r.reports[k].iteration == k + 1);
    }
  }

  SUBCASE("cumulative counters never decrease") {
    const RunResult r = Trainer(desk_config()).run();
    for (std::size_t i = 1; i < r.reports.size(); ++i) {
      CHECK(r.reports[i].cumulative_frames >= r.reports[i - 1].cumulative_frames);
      CHECK(r.reports[i].cumulative_es_evals >=
            r.reports[i - 1].cumulative_es_evals);
    }
  }

  SUBCASE("td3_only degenerates to plain TD3") {
    RunConfig cfg = desk_config();
    cfg.es_generations_per_iter = 0;
    cfg.ratio = SampleRatio{0.0, 0.0, 1.0};
    const RunResult r = Trainer(cfg).run();
    for (const IterationReport& rep : r.reports) {
      CHECK(rep.cumulative_es_evals == 0);
      CHECK(rep.good_size == 0);
      CHECK(rep.bad_size == 0);
    }
  }

  SUBCASE("es_only degenerates to plain ES") {
    RunConfig cfg = desk_config();
    cfg.td3_frames_per_iter = 0;
    cfg.overwrite_enabled = false;
    Trainer t(cfg);
    const RunResult r = t.run();
    for (const IterationReport& rep : r.reports) {
      CHECK(rep.cumulative_frames == 0);
      CHECK(rep.noisy_size == 0);
      CHECK_FALSE(rep.overwrite_applied);
    }
    CHECK(t.agent().update_count == 0);
  }

  SUBCASE("single-buffer mode keeps good and bad empty") {
    RunConfig cfg = desk_config();
    cfg.route_all_to_noisy = true;
    cfg.ratio = SampleRatio{0.0, 0.0, 1.0};
    const RunResult r = Trainer(cfg).run();
    for (const IterationReport& rep : r.reports) {
      CHECK(rep.good_size == 0);
      CHECK(rep.bad_size == 0);
      CHECK(rep.noisy_size > 0);
    }
    // ES trajectories still feed the threshold.
    CHECK(std::isfinite(r.reports.back().threshold));
  }

  SUBCASE("serial and parallel offspring evaluation yield identical runs") {
    RunConfig cfg = desk_config();
    cfg.es_parallel_eval = false;
    const RunResult serial = Trainer(cfg).run();
    cfg.es_parallel_eval = true;
    const RunResult parallel = Trainer(cfg).run();
    REQUIRE(serial.reports.size() == parallel.reports.size());
    for (std::size_t i = 0; i < serial.reports.size(); ++i) {
      CHECK(reports_equal(serial.reports[i], parallel.reports[i]));
    }
    CHECK(flatten(serial.final_mean) == flatten(parallel.final_mean));
  }
}

TEST_CASE("config validation") {
  RunConfig cfg = desk_config();
  cfg.es_sigma = -1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = desk_config();
  cfg.ratio = SampleRatio{0.5, 0.2, 0.2};
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = desk_config();
  cfg.hidden_sizes = {};
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
