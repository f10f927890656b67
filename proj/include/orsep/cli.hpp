#pragma once

namespace orsep {

// Parses argv, dispatches subcommands, prints results to stdout.
// Exit codes: 0 decided/verified, 2 budget exhausted, 1 any error.
int run_cli(int argc, const char* const* argv);

}  // namespace orsep
