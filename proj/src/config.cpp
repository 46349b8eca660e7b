#include "estd3/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace estd3 {

namespace {

using nlohmann::json;

[[noreturn]] void reject(const std::string& key, const std::string& why) {
  throw ConfigError("config key '" + key + "': " + why);
}

double as_number(const json& v, const std::string& key) {
  if (!v.is_number()) reject(key, "expected a number");
  return v.get<double>();
}

long as_integer(const json& v, const std::string& key) {
  if (!v.is_number_integer()) reject(key, "expected an integer");
  return v.get<long>();
}

bool as_bool(const json& v, const std::string& key) {
  if (!v.is_boolean()) reject(key, "expected a boolean");
  return v.get<bool>();
}

std::string as_string(const json& v, const std::string& key) {
  if (!v.is_string()) reject(key, "expected a string");
  return v.get<std::string>();
}

long positive(long v, const std::string& key) {
  if (v < 1) reject(key, "must be >= 1 (got " + std::to_string(v) + ")");
  return v;
}

long non_negative(long v, const std::string& key) {
  if (v < 0) reject(key, "must be >= 0 (got " + std::to_string(v) + ")");
  return v;
}

double positive_real(double v, const std::string& key) {
  if (!(v > 0.0)) reject(key, "must be > 0 (got " + std::to_string(v) + ")");
  return v;
}

double non_negative_real(double v, const std::string& key) {
  if (!(v >= 0.0)) reject(key, "must be >= 0 (got " + std::to_string(v) + ")");
  return v;
}

void parse_es(const json& obj, RunConfig& cfg) {
  for (const auto& [key, value] : obj.items()) {
    const std::string path = "es." + key;
    if (key == "offspring") {
      cfg.es_offspring = static_cast<int>(positive(as_integer(value, path), path));
    } else if (key == "sigma") {
      cfg.es_sigma = positive_real(as_number(value, path), path);
    } else if (key == "learning_rate") {
      cfg.es_learning_rate = positive_real(as_number(value, path), path);
    } else if (key == "rank_shaping") {
      cfg.es_rank_shaping = as_bool(value, path);
    } else if (key == "parallel_eval") {
      cfg.es_parallel_eval = as_bool(value, path);
    } else {
      reject(path, "unknown key");
    }
  }
}

void parse_td3(const json& obj, RunConfig& cfg) {
  for (const auto& [key, value] : obj.items()) {
    const std::string path = "td3." + key;
    if (key == "gamma") {
      const double g = as_number(value, path);
      if (g < 0.0 || g > 1.0) reject(path, "must be in [0, 1]");
      cfg.td3.gamma = g;
    } else if (key == "tau") {
      const double t = as_number(value, path);
      if (!(t > 0.0 && t <= 1.0)) reject(path, "must be in (0, 1]");
      cfg.td3.tau = t;
    } else if (key == "policy_delay") {
      cfg.td3.policy_delay = static_cast<int>(positive(as_integer(value, path), path));
    } else if (key == "explore_noise_std") {
      cfg.td3.explore_noise_std = non_negative_real(as_number(value, path), path);
    } else if (key == "target_noise_std") {
      cfg.td3.target_noise_std = non_negative_real(as_number(value, path), path);
    } else if (key == "target_noise_clip") {
      cfg.td3.target_noise_clip = non_negative_real(as_number(value, path), path);
    } else if (key == "batch_size") {
      cfg.td3.batch_size = static_cast<int>(positive(as_integer(value, path), path));
    } else if (key == "learning_rate") {
      cfg.td3.learning_rate = positive_real(as_number(value, path), path);
    } else if (key == "warmup_transitions") {
      cfg.warmup_transitions = non_negative(as_integer(value, path), path);
    } else {
      reject(path, "unknown key");
    }
  }
}

void parse_buffer(const json& obj, RunConfig& cfg) {
  for (const auto& [key, value] : obj.items()) {
    const std::string path = "buffer." + key;
    if (key == "capacity") {
      cfg.buffer_capacity = static_cast<std::size_t>(positive(as_integer(value, path), path));
    } else if (key == "ratio") {
      if (!value.is_array() || value.size() != 3) {
        reject(path, "expected an array of three numbers [good, bad, noisy]");
      }
      SampleRatio r;
      r.good = as_number(value[0], path);
      r.bad = as_number(value[1], path);
      r.noisy = as_number(value[2], path);
      try {
        r.validate();
      } catch (const std::invalid_argument& e) {
        reject(path, e.what());
      }
      cfg.ratio = r;
    } else if (key == "good_fraction") {
      const double f = as_number(value, path);
      if (!(f > 0.0 && f <= 1.0)) reject(path, "must be in (0, 1]");
      cfg.good_fraction = f;
    } else if (key == "threshold_mode") {
      const std::string mode = as_string(value, path);
      if (mode == "literal") {
        cfg.threshold_mode = ThresholdTracker::Mode::Literal;
      } else if (mode == "offset") {
        cfg.threshold_mode = ThresholdTracker::Mode::Offset;
      } else {
        reject(path, "expected 'literal' or 'offset'");
      }
    } else if (key == "route_all_to_noisy") {
      cfg.route_all_to_noisy = as_bool(value, path);
    } else {
      reject(path, "unknown key");
    }
  }
}

void parse_network(const json& obj, RunConfig& cfg) {
  for (const auto& [key, value] : obj.items()) {
    const std::string path = "network." + key;
    if (key == "hidden_sizes") {
      if (!value.is_array() || value.empty()) {
        reject(path, "expected a non-empty array of integers");
      }
      std::vector<int> sizes;
      for (const auto& v : value) {
        sizes.push_back(static_cast<int>(positive(as_integer(v, path), path)));
      }
      cfg.hidden_sizes = std::move(sizes);
    } else {
      reject(path, "unknown key");
    }
  }
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
  RunConfig cfg;
  const bool blank = std::all_of(text.begin(), text.end(), [](unsigned char c) {
    return std::isspace(c);
  });
  if (blank) return cfg;  // empty document: all defaults

  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed configuration: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("configuration must be a JSON object");

  for (const auto& [key, value] : root.items()) {
    if (key == "env") {
      cfg.env_name = as_string(value, key);
    } else if (key == "iterations") {
      cfg.iterations = static_cast<int>(non_negative(as_integer(value, key), key));
    } else if (key == "td3_frames_per_iter") {
      cfg.td3_frames_per_iter = non_negative(as_integer(value, key), key);
    } else if (key == "es_generations_per_iter") {
      cfg.es_generations_per_iter =
          static_cast<int>(non_negative(as_integer(value, key), key));
    } else if (key == "seed") {
      cfg.seed = static_cast<std::uint64_t>(non_negative(as_integer(value, key), key));
    } else if (key == "overwrite_eval_episodes") {
      cfg.overwrite_eval_episodes =
          static_cast<int>(positive(as_integer(value, key), key));
    } else if (key == "overwrite_enabled") {
      cfg.overwrite_enabled = as_bool(value, key);
    } else if (key == "es") {
      if (!value.is_object()) reject(key, "expected an object");
      parse_es(value, cfg);
    } else if (key == "td3") {
      if (!value.is_object()) reject(key, "expected an object");
      parse_td3(value, cfg);
    } else if (key == "buffer") {
      if (!value.is_object()) reject(key, "expected an object");
      parse_buffer(value, cfg);
    } else if (key == "network") {
      if (!value.is_object()) reject(key, "expected an object");
      parse_network(value, cfg);
    } else {
      reject(key, "unknown key");
    }
  }

  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  // make_env is the authority on environment names; fail early here.
  try {
    make_env(cfg.env_name);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config key 'env': ") + e.what());
  }
  return cfg;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration file: " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config_text(text.str());
}

std::string config_to_json(const RunConfig& cfg) {
  json root;
  root["env"] = cfg.env_name;
  root["iterations"] = cfg.iterations;
  root["td3_frames_per_iter"] = cfg.td3_frames_per_iter;
  root["es_generations_per_iter"] = cfg.es_generations_per_iter;
  root["seed"] = cfg.seed;
  root["overwrite_eval_episodes"] = cfg.overwrite_eval_episodes;
  root["overwrite_enabled"] = cfg.overwrite_enabled;
  root["network"]["hidden_sizes"] = cfg.hidden_sizes;
  root["es"]["offspring"] = cfg.es_offspring;
  root["es"]["sigma"] = cfg.es_sigma;
  root["es"]["learning_rate"] = cfg.es_learning_rate;
  root["es"]["rank_shaping"] = cfg.es_rank_shaping;
  root["es"]["parallel_eval"] = cfg.es_parallel_eval;
  root["td3"]["gamma"] = cfg.td3.gamma;
  root["td3"]["tau"] = cfg.td3.tau;
  root["td3"]["policy_delay"] = cfg.td3.policy_delay;
  root["td3"]["explore_noise_std"] = cfg.td3.explore_noise_std;
  root["td3"]["target_noise_std"] = cfg.td3.target_noise_std;
  root["td3"]["target_noise_clip"] = cfg.td3.target_noise_clip;
  root["td3"]["batch_size"] = cfg.td3.batch_size;
  root["td3"]["learning_rate"] = cfg.td3.learning_rate;
  root["td3"]["warmup_transitions"] = cfg.warmup_transitions;
  root["buffer"]["capacity"] = cfg.buffer_capacity;
  root["buffer"]["ratio"] = {cfg.ratio.good, cfg.ratio.bad, cfg.ratio.noisy};
  root["buffer"]["good_fraction"] = cfg.good_fraction;
  root["buffer"]["threshold_mode"] =
      cfg.threshold_mode == ThresholdTracker::Mode::Literal ? "literal" : "offset";
  root["buffer"]["route_all_to_noisy"] = cfg.route_all_to_noisy;
  return root.dump(2) + "\n";
}

}  // namespace estd3
