#pragma once

#include "cli_config.hpp"

namespace obcal::cli {

/// Each command writes its report to config.output and returns the process
/// exit code: 0 on success, 1 on I/O or data errors. Configuration problems
/// are caught earlier and exit with 2.
int cmd_estimate(const RunConfig& config);
int cmd_simulate(const RunConfig& config);
int cmd_enumerate(const RunConfig& config);

int run_command(const RunConfig& config);

}  // namespace obcal::cli
