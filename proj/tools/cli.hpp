#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ice::cli {

/// Runs the `ice` command line with argv-style arguments (args[0] is the
/// program name). Returns the process exit code; errors are written to err
/// as a single line.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ice::cli
