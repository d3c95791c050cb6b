#pragma once

#include <string>
#include <vector>

namespace invsrc {

// Command-line driver (subcommands: run, selftest, export-mesh).  Kept in
// the library so the whole surface is testable in-process; the installed
// binary is a thin wrapper.  Returns the process exit code: 0 on success,
// 1 on selftest failure, 2 on invalid configuration or runtime errors
// (reported as a JSON error record on stderr).
int run_cli(const std::vector<std::string>& args);
int run_cli(int argc, const char* const* argv);

}  // namespace invsrc
