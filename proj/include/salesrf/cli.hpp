#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace salesrf::cli {

/// Runs one `salesrf` invocation. args excludes the program name. Returns the
/// process exit status; errors are reported on `err` as a single line
///     salesrf: error[<category>]: <message>
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace salesrf::cli
