#pragma once

#include <string>
#include <vector>

namespace scr {

// Dispatches one subcommand (simulate, fit-freq, fit-bayes, fit-aft,
// diagnose, predict) driven by a JSON config file.  Returns the process
// exit code: 0 success, 1 config or validation error, 2 runtime failure.
int run_cli(const std::vector<std::string>& args);
int run_cli(int argc, const char* const* argv);

}  // namespace scr
