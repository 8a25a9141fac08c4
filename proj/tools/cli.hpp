#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ecir::cli {

/// Runs the `ecir` command line. args excludes the program name. Returns the
/// process exit code; diagnostics go to err as a single line.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ecir::cli
