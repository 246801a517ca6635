#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "sawr/cli/config.hpp"

namespace sawr::cli {

enum ExitCode { kOk = 0, kValidation = 1, kData = 2, kRuntime = 3 };

/// Command names in documentation order.
const std::vector<std::string>& command_names();

/// Runs `command` with an already validated configuration. Results go to
/// `out`, progress and diagnostics to `err`. Every run appends to a
/// RunManifest. Returns the exit status: 1 for configuration problems, 2
/// for unreadable or inconsistent data, 3 for any other failure.
int run_command(const std::string& command, const ExperimentConfig& config, std::ostream& out, std::ostream& err);

}  // namespace sawr::cli
