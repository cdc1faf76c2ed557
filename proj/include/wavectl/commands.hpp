#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "wavectl/config.hpp"

namespace wavectl {

/// Process exit codes.
enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitVerification = 2, kExitSolver = 3 };

struct CommandResult {
  int exit_code = kExitOk;
  std::string summary;  ///< one line of key=value pairs
  std::filesystem::path directory;
};

/// Output root: WAVECTL_OUT when set, otherwise the configured directory.
std::filesystem::path output_root(const RunConfig& cfg);

/// Each command writes its artifacts (resolved.cfg, CSVs, plot scripts) into `dir`.
/// Errors propagate as wavectl::Error.
CommandResult cmd_linear_solve(const RunConfig& cfg, const std::filesystem::path& dir);
CommandResult cmd_semilinear_solve(const RunConfig& cfg, const std::filesystem::path& dir);
CommandResult cmd_verify_carleman(const RunConfig& cfg, const std::filesystem::path& dir);
CommandResult cmd_verify_optimality(const RunConfig& cfg, const std::filesystem::path& dir);
CommandResult cmd_growth_check(const RunConfig& cfg, const std::filesystem::path& dir);
/// Runs semilinear-solve once per value of `param` (any config key) on worker threads,
/// each in its own subdirectory, and merges sweep.csv in value order.
CommandResult cmd_sweep(const RunConfig& cfg, const std::filesystem::path& dir, const std::string& param,
                        const std::vector<std::string>& values);

struct CommandRequest {
  std::string command;
  std::filesystem::path config;
  std::optional<unsigned long long> seed;
  std::string param;
  std::vector<std::string> values;
};

const std::vector<std::string>& command_names();

/// Parses the config, dispatches, and maps every failure to an exit code with error.txt
/// written next to the other artifacts. Never throws.
CommandResult run_command(const CommandRequest& request);

}  // namespace wavectl
