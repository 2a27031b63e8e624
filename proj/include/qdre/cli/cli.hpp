#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qdre::cli {

enum ExitCode : int {
    kExitOk = 0,
    kExitFailure = 1,
    kExitConfig = 2,
    kExitData = 3,
    kExitNumerical = 4,
};

/// Entry point of the `qdre` tool. Subcommands: generate, train, evaluate,
/// reweight, compare. Returns the process exit code.
int run_cli(int argc, const char* const* argv);

/// Same, with arguments excluding the program name and explicit streams.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qdre::cli
