#pragma once

#include <string>
#include <vector>

namespace slblr::cli {

/// Entry point behind the binary: subcommands solve | compare | verify.
/// Returns 0 on success, 1 on usage or validation errors, 2 when a solve
/// finished but repair found no feasible solution.
int run(const std::vector<std::string>& args);
int run(int argc, char** argv);

}  // namespace slblr::cli
