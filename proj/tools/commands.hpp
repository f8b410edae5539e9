#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace kdenoise::cli {

// Runs one command line (without the program name). Reports go to `out`
// unless --out names a directory; errors go to `err` as one JSON line.
// Returns 0 iff every asserted check passed.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace kdenoise::cli
