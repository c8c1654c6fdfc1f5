#pragma once

#include <iosfwd>

namespace rmtp::cli {

// Runs the command line; returns the process exit code
// (0 pass, 1 statistical fail, 2 usage or config error, 3 numerical failure).
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rmtp::cli
