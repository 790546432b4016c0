#pragma once

// The four batch commands. Each returns its artifacts in memory; the
// executable decides whether to write them to a directory or stdout.

#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "bellab/app/config.hpp"

namespace bellab::app {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitConfigError = 2;

struct OutputFile {
  std::string name;
  std::string content;
};

struct CommandResult {
  int exit_code = kExitOk;
  std::vector<OutputFile> files;
  std::string summary;      // human-readable report
  std::string diagnostics;  // set when exit_code == 2

  /// First artifact with the given extension ("csv" or "json"), or null.
  const OutputFile* file_with_extension(std::string_view ext) const;
};

CommandResult run_correlate(const nlohmann::json& config, const Overrides& overrides);
CommandResult run_chsh(const nlohmann::json& config, const Overrides& overrides);
CommandResult run_verify(const nlohmann::json& config, const Overrides& overrides);
CommandResult run_oscillator(const nlohmann::json& config, const Overrides& overrides);

/// Dispatches by name; configuration and model errors become exit code 2.
CommandResult run_command(std::string_view command, const nlohmann::json& config, const Overrides& overrides);

}  // namespace bellab::app
