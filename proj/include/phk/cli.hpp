#pragma once

namespace phk {

// Entry point for the command-line tool. Exit codes: 0 success, 1 runtime
// failure (unreadable input, capability limits), 2 usage error.
int run_cli(int argc, const char* const* argv);

}  // namespace phk
