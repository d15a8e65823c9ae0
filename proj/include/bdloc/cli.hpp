// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end. Each subcommand writes a CSV next to a JSON sidecar
// that records the resolved configuration, seed, phi, version and the command
// line that regenerates it.
#pragma once

#include "bdloc/config.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace bdloc {

enum ExitCode : int
{
    kExitOk = 0,
    kExitValidation = 1,
    kExitNumerical = 2,
    kExitIo = 3
};

std::vector<std::string> subcommands();

// Runs config.command. Exceptions are mapped to exit codes and reported on err.
int dispatch(const RunConfig& config, std::ostream& out, std::ostream& err);

// Full entry point: argument parsing, config resolution, dispatch.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Shell command that reproduces a run with the same resolved configuration.
std::string reproduce_command(const RunConfig& config);

} // namespace bdloc
