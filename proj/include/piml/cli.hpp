#pragma once

#include <string>
#include <vector>

namespace piml {

/// Runs one command-line invocation; `args` excludes the program name.
/// Subcommands: synth, fit-constitutive, train, predict, cv, gradcheck,
/// report. Returns the process exit code: 0 success, 1 usage error, 2
/// data/validation error, 3 numerical failure.
int dispatch(const std::vector<std::string>& args);

}  // namespace piml
