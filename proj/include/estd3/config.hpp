#pragma once

#include <stdexcept>
#include <string>

#include "estd3/orchestrator.hpp"

namespace estd3 {

/// Configuration rejection with a message naming the offending key.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Parses the JSON run configuration. Every key is optional and falls back
/// to the RunConfig default; unknown keys, wrong types and out-of-range
/// values are rejected with a diagnostic naming the key. An empty (or
/// whitespace-only) document yields all defaults.
RunConfig parse_config_text(const std::string& text);

/// Same, reading from a file. Throws ConfigError if the file is missing.
RunConfig parse_config(const std::string& path);

/// Serializes a config back to JSON (all keys explicit, sorted).
std::string config_to_json(const RunConfig& config);

}  // namespace estd3
