#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <string>

#include "estd3/config.hpp"

using namespace estd3;

namespace {

bool mentions(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

std::string error_of(const std::string& text) {
  try {
    parse_config_text(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("defaults") {
  SUBCASE("an empty document yields all defaults") {
    const RunConfig cfg = parse_config_text("");
    CHECK(cfg.env_name == "pointmass2d");
    CHECK(cfg.iterations == 10);
    CHECK(cfg.td3_frames_per_iter == 5000);
    CHECK(cfg.es_generations_per_iter == 10);
    CHECK(cfg.es_offspring == 10);
    CHECK(cfg.es_sigma == 0.005);
    CHECK(cfg.es_learning_rate == 0.001);
    CHECK(cfg.td3.tau == 0.005);
    CHECK(cfg.td3.learning_rate == 0.0003);
    CHECK(cfg.td3.explore_noise_std == 0.1);
    CHECK(cfg.ratio.good == 0.5);
    CHECK(cfg.ratio.bad == 0.2);
    CHECK(cfg.ratio.noisy == 0.3);
    CHECK(cfg.good_fraction == 0.9);
    CHECK(cfg.threshold_mode == ThresholdTracker::Mode::Literal);
  }

  SUBCASE("whitespace and the empty object behave the same") {
    const RunConfig a = parse_config_text("  \n\t ");
    const RunConfig b = parse_config_text("{}");
    CHECK(a.es_sigma == b.es_sigma);
    CHECK(a.iterations == b.iterations);
  }
}

TEST_CASE("rejections name the offending key") {
  CHECK(mentions(error_of(R"({"buffer": {"ratio": [0.5, 0.2, 0.2]}})"),
                 "ratio"));
  CHECK(mentions(error_of(R"({"es": {"sigma": -1}})"), "sigma"));
  CHECK(mentions(error_of(R"({"frobnicate": 1})"), "frobnicate"));
  CHECK(mentions(error_of(R"({"td3": {"frobnicate": 1}})"), "td3.frobnicate"));
  CHECK(mentions(error_of(R"({"iterations": "ten"})"), "iterations"));
  CHECK(mentions(error_of(R"({"td3": {"gamma": 1.5}})"), "gamma"));
  CHECK(mentions(error_of(R"({"env": "mujoco"})"), "env"));
  CHECK(mentions(error_of(R"({"buffer": {"threshold_mode": "fuzzy"}})"),
                 "threshold_mode"));
  CHECK(mentions(error_of("{nope"), "malformed"));
  CHECK(mentions(error_of("[1,2,3]"), "object"));
}

TEST_CASE("values are applied") {
  const RunConfig cfg = parse_config_text(R"({
    "env": "corridor",
    "iterations": 3,
    "td3_frames_per_iter": 1000,
    "es_generations_per_iter": 4,
    "seed": 17,
    "network": {"hidden_sizes": [16, 16]},
    "es": {"offspring": 7, "sigma": 0.25, "rank_shaping": false},
    "td3": {"gamma": 0.95, "batch_size": 32, "warmup_transitions": 111},
    "buffer": {"capacity": 5000, "ratio": [0.6, 0.1, 0.3],
               "threshold_mode": "offset", "route_all_to_noisy": true},
    "overwrite_enabled": false
  })");
  CHECK(cfg.env_name == "corridor");
  CHECK(cfg.iterations == 3);
  CHECK(cfg.td3_frames_per_iter == 1000);
  CHECK(cfg.es_generations_per_iter == 4);
  CHECK(cfg.seed == 17);
  CHECK(cfg.hidden_sizes == std::vector<int>{16, 16});
  CHECK(cfg.es_offspring == 7);
  CHECK(cfg.es_sigma == 0.25);
  CHECK_FALSE(cfg.es_rank_shaping);
  CHECK(cfg.td3.gamma == 0.95);
  CHECK(cfg.td3.batch_size == 32);
  CHECK(cfg.warmup_transitions == 111);
  CHECK(cfg.buffer_capacity == 5000);
  CHECK(cfg.ratio.good == 0.6);
  CHECK(cfg.threshold_mode == ThresholdTracker::Mode::Offset);
  CHECK(cfg.route_all_to_noisy);
  CHECK_FALSE(cfg.overwrite_enabled);
}

TEST_CASE("files") {
  SUBCASE("a missing file is a distinct error") {
    CHECK_THROWS_AS(parse_config("/nonexistent/config.json"), ConfigError);
  }

  SUBCASE("round-trip through serialization") {
    RunConfig cfg = parse_config_text(R"({"es": {"sigma": 0.42}, "seed": 3})");
    const std::string path = "/tmp/estd3_cfg_roundtrip.json";
    {
      std::ofstream out(path);
      out << config_to_json(cfg);
    }
    const RunConfig back = parse_config(path);
    CHECK(back.es_sigma == 0.42);
    CHECK(back.seed == 3);
    CHECK(back.iterations == cfg.iterations);
    std::remove(path.c_str());
  }
}
