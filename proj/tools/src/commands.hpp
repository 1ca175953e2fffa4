#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace subfbsde::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitValidation = 2,
  kExitDiverged = 3,
  kExitHypothesis = 4,
};

struct RunOptions {
  std::optional<std::filesystem::path> output_dir;  // overrides the config's output_dir
  std::ostream* log = nullptr;                      // human-readable messages; nullptr silences them
};

struct RunOutcome {
  int exit_code = kExitOk;
  std::vector<std::filesystem::path> artifacts;
  std::string message;
};

const std::vector<std::string>& subcommands();

/// Never throws: every failure is mapped onto an exit code and a message.
RunOutcome run(std::string_view subcommand, const std::filesystem::path& config_path, const RunOptions& options = {});
RunOutcome run(std::string_view subcommand, const nlohmann::json& config, const RunOptions& options = {});

}  // namespace subfbsde::cli
