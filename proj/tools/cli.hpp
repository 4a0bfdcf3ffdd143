#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace punchdet::cli {

/// Runs one command line (args[0] is the program name). Returns the process
/// exit code: 0 on success, non-zero when any error fired.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace punchdet::cli
