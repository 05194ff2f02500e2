#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace agile::cli {

/// Entry point of the agilec tool. `args` excludes the program name.
/// Returns the process exit code: 0 ok, 2 partial (quarantines), 1 fatal.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace agile::cli
