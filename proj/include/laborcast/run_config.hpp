#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "laborcast/pipeline.hpp"

namespace laborcast {

// A parsed `key = value` configuration file. Unknown keys are rejected.
struct ParsedRunConfig {
  RunConfig run;
  std::optional<std::string> features_path;
  std::optional<std::string> target_path;
};

ParsedRunConfig parse_run_config(std::string_view text);

// The default configuration rendered in file form (documentation aid).
std::string serialize_run_config(const ParsedRunConfig& cfg);

}  // namespace laborcast
