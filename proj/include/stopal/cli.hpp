#pragma once

#include <optional>
#include <string>
#include <vector>

#include "stopal/experiment.hpp"

namespace stopal {

enum class CliAction { kRun, kEval, kRadius };

struct CliCommand {
  CliAction action = CliAction::kRun;
  ExperimentConfig config;   // run
  std::string trace_path;    // eval
  double kl_forward = 0.0;   // radius
  double kl_backward = 0.0;
  std::optional<double> gamma;
};

/// Thrown when --help is requested; carries the text to print.
struct CliHelp {
  std::string text;
};

/// Parse failure or invalid flag values; the CLI exits 2 on these.
struct CliError : ConfigError {
  using ConfigError::ConfigError;
};

/// Parses the arguments after the program name. Throws CliHelp or CliError.
CliCommand cli_parse(const std::vector<std::string>& args);

/// Full driver: parse, execute, map errors to exit codes (2 for usage and
/// validation problems, 1 for runtime failures).
int cli_main(int argc, char** argv);

}  // namespace stopal
