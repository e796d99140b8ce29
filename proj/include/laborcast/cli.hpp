#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "laborcast/report.hpp"

namespace laborcast {

struct IngestCommand {
  std::string features_path;
  std::optional<std::string> target_path;
  std::optional<std::string> out_dir;
};

struct SelectFeaturesCommand {
  std::string features_path;
  std::string target_path;
  int k = 20;
  int horizon = 0;
  std::uint64_t seed = 42;
  std::optional<std::string> out_dir;
};

struct BenchmarkCommand {
  std::string config_path;
  std::optional<std::string> features_path;  // overrides the config file
  std::optional<std::string> target_path;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> horizon;
  bool all_features = false;
  ReportFormat format = ReportFormat::Table;
};

struct ReportCommand {
  std::string grid_path;
  ReportFormat format = ReportFormat::Table;
};

// --help handled inside parse_args (prints usage, exits 0).
struct HelpRequested {};

using Command = std::variant<IngestCommand, SelectFeaturesCommand, BenchmarkCommand,
                             ReportCommand, HelpRequested>;

// Throws CLI::ParseError (exit code 1 territory) on unknown flags or
// missing required values.
Command parse_args(const std::vector<std::string>& argv);

// Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
int run_command(const Command& cmd);

// Full entry point used by main(): parse, dispatch, map errors to codes.
int cli_main(int argc, const char* const* argv);

}  // namespace laborcast
